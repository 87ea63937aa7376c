#pragma once

// Dense compute kernels behind the autograd ops. Every kernel has a plain
// serial implementation (the reference used by the tests and the bit-exact
// CLI mode) and an OpenMP variant parallelized over disjoint output slices,
// so both produce identical bits for identical inputs. Dispatch is on
// threading::threads().

#include <cstdint>

namespace mvact::kernels {

enum class Padding { valid, same };

// out = floor((in + pad_total - k) / stride) + 1
int conv_out_dim(int in, int k, int stride, Padding pad);
int pad_before(int in, int k, int stride, Padding pad);

// ---- matmul: C[m,n] (+)= A[m,k] * B[k,n] ------------------------------

void matmul(const double* A, const double* B, double* C, int m, int k, int n,
            bool accumulate);
// C[k,n] (+)= A[m,k]^T * B[m,n]
void matmul_ta(const double* A, const double* B, double* C, int m, int k,
               int n, bool accumulate);
// C[m,k] (+)= A[m,n] * B[k,n]^T
void matmul_tb(const double* A, const double* B, double* C, int m, int k,
               int n, bool accumulate);

// ---- conv2d: x[n,h,w,ci], K[kh,kw,ci,co], y[n,oh,ow,co] ---------------

struct Conv2dDims {
  int n, h, w, ci;
  int kh, kw, co;
  int stride;
  Padding pad;
  int oh() const { return conv_out_dim(h, kh, stride, pad); }
  int ow() const { return conv_out_dim(w, kw, stride, pad); }
};

void conv2d_forward(const Conv2dDims& d, const double* x, const double* K,
                    const double* bias, double* y);
void conv2d_backward_input(const Conv2dDims& d, const double* dy,
                           const double* K, double* dx);
void conv2d_backward_kernel(const Conv2dDims& d, const double* x,
                            const double* dy, double* dK);
void conv2d_backward_bias(const Conv2dDims& d, const double* dy, double* db);

// ---- conv3d (stride 1): x[n,t,h,w,ci], K[kt,kh,kw,ci,co] --------------

struct Conv3dDims {
  int n, t, h, w, ci;
  int kt, kh, kw, co;
  Padding pad;
  int ot() const { return conv_out_dim(t, kt, 1, pad); }
  int oh() const { return conv_out_dim(h, kh, 1, pad); }
  int ow() const { return conv_out_dim(w, kw, 1, pad); }
};

void conv3d_forward(const Conv3dDims& d, const double* x, const double* K,
                    const double* bias, double* y);
void conv3d_backward_input(const Conv3dDims& d, const double* dy,
                           const double* K, double* dx);
void conv3d_backward_kernel(const Conv3dDims& d, const double* x,
                            const double* dy, double* dK);
void conv3d_backward_bias(const Conv3dDims& d, const double* dy, double* db);

// ---- serial reference variants (exported for tests/bench) ------------

void matmul_serial(const double* A, const double* B, double* C, int m, int k,
                   int n, bool accumulate);
void matmul_omp(const double* A, const double* B, double* C, int m, int k,
                int n, bool accumulate);
void conv2d_forward_serial(const Conv2dDims& d, const double* x,
                           const double* K, const double* bias, double* y);
void conv2d_forward_omp(const Conv2dDims& d, const double* x, const double* K,
                        const double* bias, double* y);
void conv2d_backward_input_serial(const Conv2dDims& d, const double* dy,
                                  const double* K, double* dx);
void conv2d_backward_input_omp(const Conv2dDims& d, const double* dy,
                               const double* K, double* dx);
void conv2d_backward_kernel_serial(const Conv2dDims& d, const double* x,
                                   const double* dy, double* dK);
void conv2d_backward_kernel_omp(const Conv2dDims& d, const double* x,
                                const double* dy, double* dK);
void conv3d_forward_serial(const Conv3dDims& d, const double* x,
                           const double* K, const double* bias, double* y);
void conv3d_forward_omp(const Conv3dDims& d, const double* x, const double* K,
                        const double* bias, double* y);

}  // namespace mvact::kernels
