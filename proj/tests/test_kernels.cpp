#include <vector>

#include "doctest.h"
#include "mvact/common.hpp"
#include "mvact/kernels.hpp"
#include "mvact/threading.hpp"

namespace k = mvact::kernels;
using mvact::Rng;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("matmul matches naive oracle") {
  Rng rng(11);
  const int m = 7, kk = 5, n = 9;
  auto A = random_vec(std::size_t(m) * kk, rng);
  auto B = random_vec(std::size_t(kk) * n, rng);
  std::vector<double> C(std::size_t(m) * n, 0.0);
  k::matmul_serial(A.data(), B.data(), C.data(), m, kk, n, false);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < kk; ++l) acc += A[i * kk + l] * B[l * n + j];
      CHECK(C[i * n + j] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("omp variants are bit-identical to serial reference") {
  Rng rng(17);
  const int m = 13, kk = 8, n = 11;
  auto A = random_vec(std::size_t(m) * kk, rng);
  auto B = random_vec(std::size_t(kk) * n, rng);
  std::vector<double> Cs(std::size_t(m) * n), Cp(std::size_t(m) * n);
  k::matmul_serial(A.data(), B.data(), Cs.data(), m, kk, n, false);
  k::matmul_omp(A.data(), B.data(), Cp.data(), m, kk, n, false);
  CHECK(Cs == Cp);

  k::Conv2dDims d{2, 9, 7, 3, 3, 3, 4, 1, k::Padding::same};
  auto x = random_vec(std::size_t(d.n) * d.h * d.w * d.ci, rng);
  auto K = random_vec(std::size_t(d.kh) * d.kw * d.ci * d.co, rng);
  auto b = random_vec(std::size_t(d.co), rng);
  std::vector<double> ys(std::size_t(d.n) * d.oh() * d.ow() * d.co);
  std::vector<double> yp(ys.size());
  k::conv2d_forward_serial(d, x.data(), K.data(), b.data(), ys.data());
  k::conv2d_forward_omp(d, x.data(), K.data(), b.data(), yp.data());
  CHECK(ys == yp);

  std::vector<double> dxs(x.size(), 0.0), dxp(x.size(), 0.0);
  k::conv2d_backward_input_serial(d, ys.data(), K.data(), dxs.data());
  k::conv2d_backward_input_omp(d, ys.data(), K.data(), dxp.data());
  CHECK(dxs == dxp);

  std::vector<double> dKs(K.size(), 0.0), dKp(K.size(), 0.0);
  k::conv2d_backward_kernel_serial(d, x.data(), ys.data(), dKs.data());
  k::conv2d_backward_kernel_omp(d, x.data(), ys.data(), dKp.data());
  CHECK(dKs == dKp);

  k::Conv3dDims d3{1, 5, 6, 6, 2, 3, 3, 3, 3, k::Padding::same};
  auto x3 = random_vec(std::size_t(d3.n) * d3.t * d3.h * d3.w * d3.ci, rng);
  auto K3 = random_vec(std::size_t(d3.kt) * d3.kh * d3.kw * d3.ci * d3.co, rng);
  std::vector<double> y3s(std::size_t(d3.n) * d3.ot() * d3.oh() * d3.ow() * d3.co);
  std::vector<double> y3p(y3s.size());
  k::conv3d_forward_serial(d3, x3.data(), K3.data(), nullptr, y3s.data());
  k::conv3d_forward_omp(d3, x3.data(), K3.data(), nullptr, y3p.data());
  CHECK(y3s == y3p);
}

TEST_CASE("conv output dims") {
  CHECK(k::conv_out_dim(8, 3, 1, k::Padding::same) == 8);
  CHECK(k::conv_out_dim(8, 3, 1, k::Padding::valid) == 6);
  CHECK(k::conv_out_dim(9, 3, 2, k::Padding::same) == 5);
  CHECK(k::conv_out_dim(9, 3, 2, k::Padding::valid) == 4);
  CHECK_THROWS(k::conv_out_dim(2, 3, 1, k::Padding::valid));
}

TEST_CASE("conv2d same padding centers the kernel") {
  // 3x3 identity-center kernel reproduces the input
  k::Conv2dDims d{1, 4, 4, 1, 3, 3, 1, 1, k::Padding::same};
  Rng rng(3);
  auto x = random_vec(16, rng);
  std::vector<double> K(9, 0.0);
  K[4] = 1.0;  // center tap
  std::vector<double> y(16, -1.0);
  k::conv2d_forward(d, x.data(), K.data(), nullptr, y.data());
  for (int i = 0; i < 16; ++i) CHECK(y[i] == doctest::Approx(x[i]));
}
