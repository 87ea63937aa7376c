#include "mvact/kernels.hpp"

#include <cstring>

#include "mvact/common.hpp"
#include "mvact/threading.hpp"

namespace mvact::kernels {

int conv_out_dim(int in, int k, int stride, Padding pad) {
  if (pad == Padding::same) return (in + stride - 1) / stride;
  if (k > in) fail(ErrorKind::shape, "kernel larger than padded input");
  return (in - k) / stride + 1;
}

int pad_before(int in, int k, int stride, Padding pad) {
  if (pad == Padding::valid) return 0;
  int out = (in + stride - 1) / stride;
  int total = (out - 1) * stride + k - in;
  if (total < 0) total = 0;
  return total / 2;
}

// ---------------------------------------------------------------- matmul

void matmul_serial(const double* A, const double* B, double* C, int m, int k,
                   int n, bool accumulate) {
  if (!accumulate) std::memset(C, 0, sizeof(double) * std::size_t(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* Ai = A + std::int64_t(i) * k;
    double* Ci = C + std::int64_t(i) * n;
    for (int l = 0; l < k; ++l) {
      const double a = Ai[l];
      const double* Bl = B + std::int64_t(l) * n;
      for (int j = 0; j < n; ++j) Ci[j] += a * Bl[j];
    }
  }
}

void matmul_omp(const double* A, const double* B, double* C, int m, int k,
                int n, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* Ai = A + std::int64_t(i) * k;
    double* Ci = C + std::int64_t(i) * n;
    if (!accumulate) std::memset(Ci, 0, sizeof(double) * std::size_t(n));
    for (int l = 0; l < k; ++l) {
      const double a = Ai[l];
      const double* Bl = B + std::int64_t(l) * n;
      for (int j = 0; j < n; ++j) Ci[j] += a * Bl[j];
    }
  }
}

void matmul(const double* A, const double* B, double* C, int m, int k, int n,
            bool accumulate) {
  if (threading::parallel())
    matmul_omp(A, B, C, m, k, n, accumulate);
  else
    matmul_serial(A, B, C, m, k, n, accumulate);
}

void matmul_ta(const double* A, const double* B, double* C, int m, int k,
               int n, bool accumulate) {
  // C[k,n] += A[m,k]^T B[m,n]; row l of C owned by one pass
  if (!accumulate) std::memset(C, 0, sizeof(double) * std::size_t(k) * n);
#pragma omp parallel for schedule(static) if (threading::parallel())
  for (int l = 0; l < k; ++l) {
    double* Cl = C + std::int64_t(l) * n;
    for (int i = 0; i < m; ++i) {
      const double a = A[std::int64_t(i) * k + l];
      const double* Bi = B + std::int64_t(i) * n;
      for (int j = 0; j < n; ++j) Cl[j] += a * Bi[j];
    }
  }
}

void matmul_tb(const double* A, const double* B, double* C, int m, int k,
               int n, bool accumulate) {
  // C[m,k] += A[m,n] B[k,n]^T
  if (!accumulate) std::memset(C, 0, sizeof(double) * std::size_t(m) * k);
#pragma omp parallel for schedule(static) if (threading::parallel())
  for (int i = 0; i < m; ++i) {
    const double* Ai = A + std::int64_t(i) * n;
    double* Ci = C + std::int64_t(i) * k;
    for (int l = 0; l < k; ++l) {
      const double* Bl = B + std::int64_t(l) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += Ai[j] * Bl[j];
      Ci[l] += acc;
    }
  }
}

// ---------------------------------------------------------------- conv2d

namespace {

inline void conv2d_forward_one(const Conv2dDims& d, const double* x,
                               const double* K, const double* bias, double* y,
                               int in, int oh, int ow) {
  const int ph = pad_before(d.h, d.kh, d.stride, d.pad);
  const int pw = pad_before(d.w, d.kw, d.stride, d.pad);
  double* yo = y + (((std::int64_t(in) * d.oh() + oh) * d.ow()) + ow) * d.co;
  for (int co = 0; co < d.co; ++co) yo[co] = bias ? bias[co] : 0.0;
  for (int kh = 0; kh < d.kh; ++kh) {
    const int ih = oh * d.stride + kh - ph;
    if (ih < 0 || ih >= d.h) continue;
    for (int kw = 0; kw < d.kw; ++kw) {
      const int iw = ow * d.stride + kw - pw;
      if (iw < 0 || iw >= d.w) continue;
      const double* xi =
          x + (((std::int64_t(in) * d.h + ih) * d.w) + iw) * d.ci;
      const double* Kk = K + ((std::int64_t(kh) * d.kw + kw) * d.ci) * d.co;
      for (int ci = 0; ci < d.ci; ++ci) {
        const double xv = xi[ci];
        const double* Kc = Kk + std::int64_t(ci) * d.co;
        for (int co = 0; co < d.co; ++co) yo[co] += xv * Kc[co];
      }
    }
  }
}

}  // namespace

void conv2d_forward_serial(const Conv2dDims& d, const double* x,
                           const double* K, const double* bias, double* y) {
  for (int in = 0; in < d.n; ++in)
    for (int oh = 0; oh < d.oh(); ++oh)
      for (int ow = 0; ow < d.ow(); ++ow)
        conv2d_forward_one(d, x, K, bias, y, in, oh, ow);
}

void conv2d_forward_omp(const Conv2dDims& d, const double* x, const double* K,
                        const double* bias, double* y) {
  const int rows = d.n * d.oh();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int in = r / d.oh();
    const int oh = r % d.oh();
    for (int ow = 0; ow < d.ow(); ++ow)
      conv2d_forward_one(d, x, K, bias, y, in, oh, ow);
  }
}

void conv2d_forward(const Conv2dDims& d, const double* x, const double* K,
                    const double* bias, double* y) {
  if (threading::parallel())
    conv2d_forward_omp(d, x, K, bias, y);
  else
    conv2d_forward_serial(d, x, K, bias, y);
}

namespace {

inline void conv2d_backward_input_one(const Conv2dDims& d, const double* dy,
                                      const double* K, double* dx, int in) {
  const int ph = pad_before(d.h, d.kh, d.stride, d.pad);
  const int pw = pad_before(d.w, d.kw, d.stride, d.pad);
  const int OH = d.oh(), OW = d.ow();
  for (int oh = 0; oh < OH; ++oh) {
    for (int ow = 0; ow < OW; ++ow) {
      const double* dyo =
          dy + (((std::int64_t(in) * OH + oh) * OW) + ow) * d.co;
      for (int kh = 0; kh < d.kh; ++kh) {
        const int ih = oh * d.stride + kh - ph;
        if (ih < 0 || ih >= d.h) continue;
        for (int kw = 0; kw < d.kw; ++kw) {
          const int iw = ow * d.stride + kw - pw;
          if (iw < 0 || iw >= d.w) continue;
          double* dxi =
              dx + (((std::int64_t(in) * d.h + ih) * d.w) + iw) * d.ci;
          const double* Kk =
              K + ((std::int64_t(kh) * d.kw + kw) * d.ci) * d.co;
          for (int ci = 0; ci < d.ci; ++ci) {
            const double* Kc = Kk + std::int64_t(ci) * d.co;
            double acc = 0.0;
            for (int co = 0; co < d.co; ++co) acc += dyo[co] * Kc[co];
            dxi[ci] += acc;
          }
        }
      }
    }
  }
}

}  // namespace

void conv2d_backward_input_serial(const Conv2dDims& d, const double* dy,
                                  const double* K, double* dx) {
  for (int in = 0; in < d.n; ++in) conv2d_backward_input_one(d, dy, K, dx, in);
}

void conv2d_backward_input_omp(const Conv2dDims& d, const double* dy,
                               const double* K, double* dx) {
// per-sample dx slices are disjoint
#pragma omp parallel for schedule(static)
  for (int in = 0; in < d.n; ++in) conv2d_backward_input_one(d, dy, K, dx, in);
}

void conv2d_backward_input(const Conv2dDims& d, const double* dy,
                           const double* K, double* dx) {
  if (threading::parallel())
    conv2d_backward_input_omp(d, dy, K, dx);
  else
    conv2d_backward_input_serial(d, dy, K, dx);
}

namespace {

inline void conv2d_backward_kernel_tap(const Conv2dDims& d, const double* x,
                                       const double* dy, double* dK, int kh,
                                       int kw) {
  const int ph = pad_before(d.h, d.kh, d.stride, d.pad);
  const int pw = pad_before(d.w, d.kw, d.stride, d.pad);
  const int OH = d.oh(), OW = d.ow();
  double* dKk = dK + ((std::int64_t(kh) * d.kw + kw) * d.ci) * d.co;
  for (int in = 0; in < d.n; ++in) {
    for (int oh = 0; oh < OH; ++oh) {
      const int ih = oh * d.stride + kh - ph;
      if (ih < 0 || ih >= d.h) continue;
      for (int ow = 0; ow < OW; ++ow) {
        const int iw = ow * d.stride + kw - pw;
        if (iw < 0 || iw >= d.w) continue;
        const double* xi =
            x + (((std::int64_t(in) * d.h + ih) * d.w) + iw) * d.ci;
        const double* dyo =
            dy + (((std::int64_t(in) * OH + oh) * OW) + ow) * d.co;
        for (int ci = 0; ci < d.ci; ++ci) {
          const double xv = xi[ci];
          double* dKc = dKk + std::int64_t(ci) * d.co;
          for (int co = 0; co < d.co; ++co) dKc[co] += xv * dyo[co];
        }
      }
    }
  }
}

}  // namespace

void conv2d_backward_kernel_serial(const Conv2dDims& d, const double* x,
                                   const double* dy, double* dK) {
  for (int kh = 0; kh < d.kh; ++kh)
    for (int kw = 0; kw < d.kw; ++kw)
      conv2d_backward_kernel_tap(d, x, dy, dK, kh, kw);
}

void conv2d_backward_kernel_omp(const Conv2dDims& d, const double* x,
                                const double* dy, double* dK) {
  const int taps = d.kh * d.kw;
// per-tap dK slices are disjoint
#pragma omp parallel for schedule(static)
  for (int t = 0; t < taps; ++t)
    conv2d_backward_kernel_tap(d, x, dy, dK, t / d.kw, t % d.kw);
}

void conv2d_backward_kernel(const Conv2dDims& d, const double* x,
                            const double* dy, double* dK) {
  if (threading::parallel())
    conv2d_backward_kernel_omp(d, x, dy, dK);
  else
    conv2d_backward_kernel_serial(d, x, dy, dK);
}

void conv2d_backward_bias(const Conv2dDims& d, const double* dy, double* db) {
  const std::int64_t rows = std::int64_t(d.n) * d.oh() * d.ow();
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* dyo = dy + r * d.co;
    for (int co = 0; co < d.co; ++co) db[co] += dyo[co];
  }
}

// ---------------------------------------------------------------- conv3d

namespace {

inline void conv3d_forward_one(const Conv3dDims& d, const double* x,
                               const double* K, const double* bias, double* y,
                               int in, int ot) {
  const int pt = pad_before(d.t, d.kt, 1, d.pad);
  const int ph = pad_before(d.h, d.kh, 1, d.pad);
  const int pw = pad_before(d.w, d.kw, 1, d.pad);
  const int OH = d.oh(), OW = d.ow();
  for (int oh = 0; oh < OH; ++oh) {
    for (int ow = 0; ow < OW; ++ow) {
      double* yo =
          y + ((((std::int64_t(in) * d.ot() + ot) * OH + oh) * OW) + ow) * d.co;
      for (int co = 0; co < d.co; ++co) yo[co] = bias ? bias[co] : 0.0;
      for (int kt = 0; kt < d.kt; ++kt) {
        const int it = ot + kt - pt;
        if (it < 0 || it >= d.t) continue;
        for (int kh = 0; kh < d.kh; ++kh) {
          const int ih = oh + kh - ph;
          if (ih < 0 || ih >= d.h) continue;
          for (int kw = 0; kw < d.kw; ++kw) {
            const int iw = ow + kw - pw;
            if (iw < 0 || iw >= d.w) continue;
            const double* xi =
                x + ((((std::int64_t(in) * d.t + it) * d.h + ih) * d.w) + iw) *
                        d.ci;
            const double* Kk =
                K + (((std::int64_t(kt) * d.kh + kh) * d.kw + kw) * d.ci) *
                        d.co;
            for (int ci = 0; ci < d.ci; ++ci) {
              const double xv = xi[ci];
              const double* Kc = Kk + std::int64_t(ci) * d.co;
              for (int co = 0; co < d.co; ++co) yo[co] += xv * Kc[co];
            }
          }
        }
      }
    }
  }
}

}  // namespace

void conv3d_forward_serial(const Conv3dDims& d, const double* x,
                           const double* K, const double* bias, double* y) {
  for (int in = 0; in < d.n; ++in)
    for (int ot = 0; ot < d.ot(); ++ot)
      conv3d_forward_one(d, x, K, bias, y, in, ot);
}

void conv3d_forward_omp(const Conv3dDims& d, const double* x, const double* K,
                        const double* bias, double* y) {
  const int rows = d.n * d.ot();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    conv3d_forward_one(d, x, K, bias, y, r / d.ot(), r % d.ot());
}

void conv3d_forward(const Conv3dDims& d, const double* x, const double* K,
                    const double* bias, double* y) {
  if (threading::parallel())
    conv3d_forward_omp(d, x, K, bias, y);
  else
    conv3d_forward_serial(d, x, K, bias, y);
}

void conv3d_backward_input(const Conv3dDims& d, const double* dy,
                           const double* K, double* dx) {
  const int pt = pad_before(d.t, d.kt, 1, d.pad);
  const int ph = pad_before(d.h, d.kh, 1, d.pad);
  const int pw = pad_before(d.w, d.kw, 1, d.pad);
  const int OT = d.ot(), OH = d.oh(), OW = d.ow();
#pragma omp parallel for schedule(static) if (threading::parallel())
  for (int in = 0; in < d.n; ++in) {
    for (int ot = 0; ot < OT; ++ot)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const double* dyo =
              dy +
              ((((std::int64_t(in) * OT + ot) * OH + oh) * OW) + ow) * d.co;
          for (int kt = 0; kt < d.kt; ++kt) {
            const int it = ot + kt - pt;
            if (it < 0 || it >= d.t) continue;
            for (int kh = 0; kh < d.kh; ++kh) {
              const int ih = oh + kh - ph;
              if (ih < 0 || ih >= d.h) continue;
              for (int kw = 0; kw < d.kw; ++kw) {
                const int iw = ow + kw - pw;
                if (iw < 0 || iw >= d.w) continue;
                double* dxi =
                    dx +
                    ((((std::int64_t(in) * d.t + it) * d.h + ih) * d.w) + iw) *
                        d.ci;
                const double* Kk =
                    K + (((std::int64_t(kt) * d.kh + kh) * d.kw + kw) * d.ci) *
                            d.co;
                for (int ci = 0; ci < d.ci; ++ci) {
                  const double* Kc = Kk + std::int64_t(ci) * d.co;
                  double acc = 0.0;
                  for (int co = 0; co < d.co; ++co) acc += dyo[co] * Kc[co];
                  dxi[ci] += acc;
                }
              }
            }
          }
        }
  }
}

void conv3d_backward_kernel(const Conv3dDims& d, const double* x,
                            const double* dy, double* dK) {
  const int pt = pad_before(d.t, d.kt, 1, d.pad);
  const int ph = pad_before(d.h, d.kh, 1, d.pad);
  const int pw = pad_before(d.w, d.kw, 1, d.pad);
  const int OT = d.ot(), OH = d.oh(), OW = d.ow();
  const int taps = d.kt * d.kh * d.kw;
#pragma omp parallel for schedule(static) if (threading::parallel())
  for (int tap = 0; tap < taps; ++tap) {
    const int kt = tap / (d.kh * d.kw);
    const int kh = (tap / d.kw) % d.kh;
    const int kw = tap % d.kw;
    double* dKk =
        dK + (((std::int64_t(kt) * d.kh + kh) * d.kw + kw) * d.ci) * d.co;
    for (int in = 0; in < d.n; ++in)
      for (int ot = 0; ot < OT; ++ot) {
        const int it = ot + kt - pt;
        if (it < 0 || it >= d.t) continue;
        for (int oh = 0; oh < OH; ++oh) {
          const int ih = oh + kh - ph;
          if (ih < 0 || ih >= d.h) continue;
          for (int ow = 0; ow < OW; ++ow) {
            const int iw = ow + kw - pw;
            if (iw < 0 || iw >= d.w) continue;
            const double* xi =
                x + ((((std::int64_t(in) * d.t + it) * d.h + ih) * d.w) + iw) *
                        d.ci;
            const double* dyo =
                dy +
                ((((std::int64_t(in) * OT + ot) * OH + oh) * OW) + ow) * d.co;
            for (int ci = 0; ci < d.ci; ++ci) {
              const double xv = xi[ci];
              double* dKc = dKk + std::int64_t(ci) * d.co;
              for (int co = 0; co < d.co; ++co) dKc[co] += xv * dyo[co];
            }
          }
        }
      }
  }
}

void conv3d_backward_bias(const Conv3dDims& d, const double* dy, double* db) {
  const std::int64_t rows = std::int64_t(d.n) * d.ot() * d.oh() * d.ow();
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* dyo = dy + r * d.co;
    for (int co = 0; co < d.co; ++co) db[co] += dyo[co];
  }
}

}  // namespace mvact::kernels
