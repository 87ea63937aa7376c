#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvact/gradcheck.hpp"
#include "mvact/optim.hpp"
#include "mvact/tape.hpp"

using namespace mvact::nn;
using mvact::Error;
using mvact::Rng;
using Ref = Tape::Ref;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(s));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// scalar-izing head so any op can be gradchecked: weighted sum with fixed
// coefficients (plain sum would miss sign errors that cancel)
Ref weighted_sum(Tape& t, Ref x) {
  const Shape shape = t.value(x).shape;
  const int n = int(t.value(x).numel());
  Tensor w(shape);
  for (std::size_t i = 0; i < w.data.size(); ++i)
    w.data[i] = 0.3 + 0.1 * double(i % 7);
  Ref wf = t.reshape(t.mul(x, t.constant(w)), {1, n});
  // sum via global_avg_pool on a [1,1,N,1] view, times N
  Ref img = t.reshape(wf, {1, 1, n, 1});
  Ref pooled = t.global_avg_pool(img);  // [1,1]
  Tensor scale({1, 1});
  scale.data[0] = double(n);
  return t.reshape(t.mul(pooled, t.constant(scale)), {1});
}

}  // namespace

TEST_CASE("dense forward examples") {
  Tape t;
  SUBCASE("identity weights") {
    Parameter W("W", Tensor({2, 2}, {1, 0, 0, 1}));
    Parameter b("b", Tensor({2}, {0, 0}));
    Ref x = t.input(Tensor({1, 2}, {3.5, -2.0}));
    Ref y = t.dense(x, W, b);
    CHECK(t.value(y).data == std::vector<double>{3.5, -2.0});
  }
  SUBCASE("hand arithmetic") {
    Parameter W("W", Tensor({2, 1}, {1, 1}));
    Parameter b("b", Tensor({1}, {3}));
    Ref x = t.input(Tensor({1, 2}, {1, 2}));
    Ref y = t.dense(x, W, b);
    CHECK(t.value(y)[0] == doctest::Approx(6.0));
  }
  SUBCASE("shape mismatch reports both shapes") {
    Parameter W("W", Tensor({3, 1}, {1, 1, 1}));
    Parameter b("b", Tensor({1}, {0}));
    Ref x = t.input(Tensor({1, 2}, {1, 2}));
    CHECK_THROWS_WITH_AS(t.dense(x, W, b),
                         doctest::Contains("incompatible"), Error);
  }
}

TEST_CASE("conv2d forward examples") {
  Tape t;
  SUBCASE("1x1 unit kernel is identity") {
    Parameter K("K", Tensor({1, 1, 1, 1}, {1.0}));
    Ref x = t.input(Tensor({1, 2, 2, 1}, {1, 2, 3, 4}));
    Ref y = t.conv2d(x, K, nullptr, 1, Padding::valid);
    CHECK(t.value(y).data == std::vector<double>{1, 2, 3, 4});
  }
  SUBCASE("2x2 ones, valid") {
    Parameter K("K", Tensor({2, 2, 1, 1}, {1, 1, 1, 1}));
    Ref x = t.input(Tensor::full({1, 2, 2, 1}, 1.0));
    Ref y = t.conv2d(x, K, nullptr, 1, Padding::valid);
    REQUIRE(t.value(y).shape == Shape{1, 1, 1, 1});
    CHECK(t.value(y)[0] == doctest::Approx(4.0));
  }
}

TEST_CASE("global depthwise conv") {
  Tape t;
  SUBCASE("ones kernel sums each channel") {
    Parameter K("K", Tensor::full({2, 2, 2}, 1.0));
    Parameter b("b", Tensor({2}));
    // channel 0: 1+2+3+4, channel 1: 10+20+30+40
    Ref x = t.input(Tensor({1, 2, 2, 2}, {1, 10, 2, 20, 3, 30, 4, 40}));
    Ref y = t.global_depthwise_conv(x, K, b);
    REQUIRE(t.value(y).shape == Shape{1, 1, 1, 2});
    CHECK(t.value(y)[0] == doctest::Approx(10.0));
    CHECK(t.value(y)[1] == doctest::Approx(100.0));
  }
  SUBCASE("zero input returns bias") {
    Parameter K("K", Tensor::full({2, 2, 1}, 0.7));
    Parameter b("b", Tensor({1}, {-2.5}));
    Ref x = t.input(Tensor::zeros({1, 2, 2, 1}));
    Ref y = t.global_depthwise_conv(x, K, b);
    CHECK(t.value(y)[0] == doctest::Approx(-2.5));
  }
}

TEST_CASE("softmax over groups") {
  SUBCASE("equal logits give uniform weights") {
    Tape t;
    Ref x = t.input(Tensor({2, 3}, {1, 1, 1, 1, 1, 1}));  // M=2, C=3
    Ref y = t.softmax_over_groups(x);
    for (double v : t.value(y).data) CHECK(v == doctest::Approx(0.5));
  }
  SUBCASE("logits (ln 3, 0) give (0.75, 0.25)") {
    Tape t;
    Ref x = t.input(Tensor({2, 1}, {std::log(3.0), 0.0}));
    Ref y = t.softmax_over_groups(x);
    CHECK(t.value(y)[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(t.value(y)[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("columns sum to one and shifts cancel") {
    Rng rng(5);
    Tensor x = random_tensor({4, 5, 6}, rng, -3.0, 3.0);
    Tape t;
    Ref y = t.softmax_over_groups(t.input(x));
    const Tensor& v = t.value(y);
    for (int l = 0; l < 4; ++l)
      for (int c = 0; c < 6; ++c) {
        double sum = 0.0;
        for (int m = 0; m < 5; ++m) sum += v.data[(l * 5 + m) * 6 + c];
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
      }
    // add a per-channel constant across the group axis
    Tensor shifted = x;
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 5; ++m)
        for (int c = 0; c < 6; ++c) shifted.data[(l * 5 + m) * 6 + c] += 0.37 * (c + 1);
    Tape t2;
    Ref y2 = t2.softmax_over_groups(t2.input(shifted));
    for (std::size_t i = 0; i < v.data.size(); ++i)
      CHECK(std::fabs(v.data[i] - t2.value(y2).data[i]) <= 1e-12);
  }
}

TEST_CASE("cross entropy of a perfect one-hot prediction is ~0") {
  Tape t;
  Ref p = t.input(Tensor({2, 3}, {1, 0, 0, 0, 0, 1}));
  Ref loss = t.cross_entropy(p, {0, 2});
  CHECK(std::fabs(t.value(loss)[0]) < 1e-9);
}

TEST_CASE("concat channels shape contract") {
  Tape t;
  Ref a = t.input(Tensor::full({1, 2, 3, 2}, 1.0));
  Ref b = t.input(Tensor::full({1, 2, 3, 5}, 2.0));
  Ref y = t.concat_channels({a, b});
  CHECK(t.value(y).shape == Shape{1, 2, 3, 7});
  // first two channels from a, rest from b
  CHECK(t.value(y).data[0] == 1.0);
  CHECK(t.value(y).data[2] == 2.0);
}

TEST_CASE("sgd step hand arithmetic") {
  Parameter p("p", Tensor({1}, {1.0}));
  p.grad.data[0] = 2.0;
  Sgd opt(0.1, 0.0);
  opt.step({&p});
  CHECK(p.value[0] == doctest::Approx(0.8));

  SUBCASE("momentum accumulates") {
    Parameter q("q", Tensor({1}, {0.0}));
    Sgd mopt(1.0, 0.5);
    q.grad.data[0] = 1.0;
    mopt.step({&q});  // v=1, q=-1
    CHECK(q.value[0] == doctest::Approx(-1.0));
    mopt.step({&q});  // v=1.5, q=-2.5
    CHECK(q.value[0] == doctest::Approx(-2.5));
  }
}

TEST_CASE("gradcheck: every op passes at 1e-6") {
  Rng rng(42);

  SUBCASE("dense") {
    Parameter W("W", random_tensor({4, 3}, rng));
    Parameter b("b", random_tensor({3}, rng));
    auto frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.dense(in[0], W, b));
    };
    auto rep = gradcheck(frag, {random_tensor({2, 4}, rng)}, {&W, &b}, 1e-6);
    INFO(rep.worst);
    CHECK(rep.pass);
  }

  SUBCASE("conv2d same/valid, stride 1 and 2") {
    for (auto pad : {Padding::same, Padding::valid}) {
      for (int stride : {1, 2}) {
        Parameter K("K", random_tensor({3, 3, 2, 3}, rng));
        Parameter b("b", random_tensor({3}, rng));
        auto frag = [&](Tape& t, const std::vector<Ref>& in) {
          return weighted_sum(t, t.conv2d(in[0], K, &b, stride, pad));
        };
        auto rep =
            gradcheck(frag, {random_tensor({2, 5, 4, 2}, rng)}, {&K, &b}, 1e-6);
        INFO("pad=", int(pad), " stride=", stride, " ", rep.worst);
        CHECK(rep.pass);
      }
    }
  }

  SUBCASE("conv3d") {
    Parameter K("K", random_tensor({2, 3, 3, 2, 2}, rng));
    Parameter b("b", random_tensor({2}, rng));
    auto frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.conv3d(in[0], K, &b, Padding::same));
    };
    auto rep =
        gradcheck(frag, {random_tensor({1, 3, 4, 4, 2}, rng)}, {&K, &b}, 1e-6);
    INFO(rep.worst);
    CHECK(rep.pass);
  }

  SUBCASE("global depthwise conv") {
    Parameter K("K", random_tensor({3, 3, 2}, rng));
    Parameter b("b", random_tensor({2}, rng));
    auto frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.global_depthwise_conv(in[0], K, b));
    };
    auto rep =
        gradcheck(frag, {random_tensor({2, 3, 3, 2}, rng)}, {&K, &b}, 1e-6);
    CHECK(rep.pass);
  }

  SUBCASE("elementwise and structural ops") {
    // relu inputs kept away from the kink
    Tensor xr(Shape{2, 6});
    for (std::size_t i = 0; i < xr.data.size(); ++i)
      xr.data[i] = (i % 2 ? 1.0 : -1.0) * (0.2 + 0.1 * double(i));
    auto relu_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.relu(in[0]));
    };
    CHECK(gradcheck(relu_frag, {xr}, {}, 1e-6).pass);

    auto sig_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.sigmoid(in[0]));
    };
    CHECK(gradcheck(sig_frag, {random_tensor({2, 5}, rng)}, {}, 1e-6).pass);

    auto tanh_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.tanh(in[0]));
    };
    CHECK(gradcheck(tanh_frag, {random_tensor({2, 5}, rng)}, {}, 1e-6).pass);

    auto addmul_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.mul(t.add(in[0], in[1]), in[1]));
    };
    CHECK(gradcheck(addmul_frag,
                    {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)},
                    {}, 1e-6)
              .pass);

    auto concat_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.concat_channels({in[0], in[1]}));
    };
    CHECK(gradcheck(concat_frag,
                    {random_tensor({2, 2, 2, 2}, rng),
                     random_tensor({2, 2, 2, 3}, rng)},
                    {}, 1e-6)
              .pass);

    auto pool_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.avg_pool2(in[0]));
    };
    CHECK(gradcheck(pool_frag, {random_tensor({1, 5, 6, 2}, rng)}, {}, 1e-6).pass);

    auto gap_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.global_avg_pool(in[0]));
    };
    CHECK(gradcheck(gap_frag, {random_tensor({2, 3, 4, 2}, rng)}, {}, 1e-6).pass);

    auto scale_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.scale_channels(in[0], in[1]));
    };
    CHECK(gradcheck(scale_frag,
                    {random_tensor({2, 3, 2, 4}, rng), random_tensor({2, 4}, rng)},
                    {}, 1e-6)
              .pass);

    auto group_frag = [&](Tape& t, const std::vector<Ref>& in) {
      Ref sm = t.softmax_over_groups(in[0]);
      return weighted_sum(t, t.take_group(sm, 1));
    };
    CHECK(gradcheck(group_frag, {random_tensor({2, 3, 4}, rng)}, {}, 1e-6).pass);

    auto time_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return weighted_sum(t, t.select_time(in[0], 1));
    };
    CHECK(gradcheck(time_frag, {random_tensor({2, 3, 2, 2}, rng)}, {}, 1e-6).pass);

    auto ce_frag = [&](Tape& t, const std::vector<Ref>& in) {
      return t.cross_entropy(t.softmax(in[0]), {1, 0});
    };
    CHECK(gradcheck(ce_frag, {random_tensor({2, 4}, rng)}, {}, 1e-6).pass);
  }
}

TEST_CASE("gradcheck negative control reports failure") {
  // analytic path sees only one factor of x; true derivative is 2x
  auto cheat = [](Tape& t, const std::vector<Ref>& in) {
    Tensor frozen = t.value(in[0]);
    Ref twin = t.constant(frozen);
    return weighted_sum(t, t.mul(in[0], twin));
  };
  Rng rng(7);
  Tensor x = random_tensor({2, 3}, rng, 0.5, 1.5);
  auto rep = gradcheck(cheat, {x}, {}, 1e-6);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_rel_err > 0.1);
}

TEST_CASE("gradcheck rejects nondeterministic fragments") {
  int counter = 0;
  auto shifty = [&counter](Tape& t, const std::vector<Ref>& in) {
    Tensor bump = Tensor::full(t.value(in[0]).shape, 0.001 * double(counter++));
    return weighted_sum(t, t.add(in[0], t.constant(bump)));
  };
  Rng rng(9);
  CHECK_THROWS_AS(gradcheck(shifty, {random_tensor({1, 2}, rng)}, {}, 1e-6),
                  Error);
}

TEST_CASE("forward passes are bit-deterministic") {
  Rng rng(21);
  Parameter K("K", random_tensor({3, 3, 2, 4}, rng));
  Parameter b("b", random_tensor({4}, rng));
  Tensor x = random_tensor({2, 6, 5, 2}, rng);
  auto run = [&]() {
    Tape t;
    Ref y = t.conv2d(t.input(x), K, &b, 1, Padding::same);
    return t.value(y).data;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip") {
  Rng rng(33);
  Parameter a("layer/W", random_tensor({3, 2}, rng));
  Parameter b("layer/b", random_tensor({2}, rng));
  const auto va = a.value.data, vb = b.value.data;
  save_checkpoint("ckpt_test.bin", {&a, &b});
  for (auto& v : a.value.data) v = 0;
  for (auto& v : b.value.data) v = 0;
  load_checkpoint("ckpt_test.bin", {&a, &b});
  CHECK(a.value.data == va);
  CHECK(b.value.data == vb);

  Parameter c("missing", Tensor({1}));
  CHECK_THROWS_AS(load_checkpoint("ckpt_test.bin", {&c}), Error);
}
