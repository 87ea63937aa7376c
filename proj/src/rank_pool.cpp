#include "mvact/rank_pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvact/common.hpp"
#include "mvact/threading.hpp"

namespace mvact::rank {

WindowPlan compute_window_plan(int frames, int segments, int epsilon) {
  if (frames < 1) fail(ErrorKind::validation, "window plan: frames must be >= 1");
  if (segments < 1) fail(ErrorKind::validation, "window plan: segments must be >= 1");
  if (epsilon <= segments)
    fail(ErrorKind::validation, "window plan: threshold must exceed segment count");

  WindowPlan plan;
  plan.frames = frames;
  plan.segments = segments;
  plan.padded_frames = std::max(frames, segments);

  const int F = plan.padded_frames;
  if (F < epsilon) {
    plan.window = F - (segments - 1);
    plan.stride = 1;
  } else {
    plan.window = F / segments;
    plan.stride = plan.window;
  }
  plan.starts.resize(std::size_t(segments));
  for (int h = 0; h < segments; ++h)
    plan.starts[std::size_t(h)] = 1 + h * plan.stride;
  // every window must land inside [1, F]
  const int last_end = plan.starts.back() + plan.window - 1;
  if (plan.window < 1 || last_end > F)
    fail(ErrorKind::numeric, "window plan: internal inconsistency");
  return plan;
}

SubSegment smooth_segment(const SubSegment& seg, Smoothing mode) {
  if (seg.frames.empty())
    fail(ErrorKind::validation, "smooth: empty segment");
  if (mode == Smoothing::none) return seg;
  SubSegment out;
  out.frames.resize(seg.frames.size());
  const std::size_t d = seg.frames[0].size();
  std::vector<double> acc(d, 0.0);
  for (std::size_t t = 0; t < seg.frames.size(); ++t) {
    if (seg.frames[t].size() != d)
      fail(ErrorKind::validation, "smooth: ragged segment");
    for (std::size_t i = 0; i < d; ++i) acc[i] += seg.frames[t][i];
    out.frames[t].resize(d);
    for (std::size_t i = 0; i < d; ++i)
      out.frames[t][i] = acc[i] / double(t + 1);
  }
  return out;
}

namespace {

// largest absolute feature entry; the internal feature scale
double feature_scale(const SubSegment& seg) {
  double m = 0.0;
  for (const auto& f : seg.frames)
    for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

void check_finite(const SubSegment& seg) {
  for (const auto& f : seg.frames)
    for (double v : f)
      if (!std::isfinite(v))
        fail(ErrorKind::numeric, "rank pool: non-finite feature");
}

// L2-regularized L2-loss SVR in the dual, coordinate descent. Targets are
// the centered normalized time indices. Stops when one full sweep moves no
// weight coordinate by more than tol.
FitResult solve_svr(const std::vector<std::vector<double>>& x,
                    const std::vector<double>& y, double c, double p,
                    int iters, std::uint64_t seed) {
  const int T = int(x.size());
  const int d = int(x[0].size());
  const double lambda = 0.5 / c;

  std::vector<double> beta(std::size_t(T), 0.0);
  std::vector<double> w(std::size_t(d), 0.0);
  std::vector<double> qd(std::size_t(T), 0.0);
  for (int i = 0; i < T; ++i)
    qd[std::size_t(i)] =
        std::inner_product(x[std::size_t(i)].begin(), x[std::size_t(i)].end(),
                           x[std::size_t(i)].begin(), 0.0);

  std::vector<int> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed ^ 0x5f3759df9e3779b9ull);

  const double tol = 1e-12;
  FitResult res;
  res.converged = false;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[std::size_t(rng.below(i))]);
    double max_dw = 0.0;
    for (int s = 0; s < T; ++s) {
      const int i = order[std::size_t(s)];
      const auto& xi = x[std::size_t(i)];
      double g = -y[std::size_t(i)] + lambda * beta[std::size_t(i)];
      for (int j = 0; j < d; ++j) g += xi[std::size_t(j)] * w[std::size_t(j)];
      const double h = qd[std::size_t(i)] + lambda;
      const double gp = g + p, gn = g - p;
      double delta;
      if (gp < h * beta[std::size_t(i)])
        delta = -gp / h;
      else if (gn > h * beta[std::size_t(i)])
        delta = -gn / h;
      else
        delta = -beta[std::size_t(i)];
      if (delta == 0.0) continue;
      beta[std::size_t(i)] += delta;
      for (int j = 0; j < d; ++j) {
        const double dw = delta * xi[std::size_t(j)];
        w[std::size_t(j)] += dw;
        max_dw = std::max(max_dw, std::fabs(dw));
      }
    }
    if (max_dw <= tol) {
      res.converged = true;
      break;
    }
  }
  res.u = std::move(w);
  return res;
}

FitResult solve_ranksvm_subgrad(const std::vector<std::vector<double>>& x,
                                double c, int iters, std::uint64_t seed) {
  const int T = int(x.size());
  const int d = int(x[0].size());

  // ordered pairs (a, b) with a later than b; capped by seeded sampling
  std::vector<std::pair<int, int>> pairs;
  for (int a = 1; a < T; ++a)
    for (int b = 0; b < a; ++b) pairs.emplace_back(a, b);
  constexpr std::size_t kMaxPairs = 4000;
  if (pairs.size() > kMaxPairs) {
    Rng rng(seed ^ 0xABCD1234ull);
    for (std::size_t i = pairs.size(); i > 1; --i)
      std::swap(pairs[i - 1], pairs[std::size_t(rng.below(i))]);
    pairs.resize(kMaxPairs);
  }

  std::vector<std::vector<double>> diff;
  diff.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      v[std::size_t(j)] = x[std::size_t(a)][std::size_t(j)] -
                          x[std::size_t(b)][std::size_t(j)];
    diff.push_back(std::move(v));
  }

  std::vector<double> u(std::size_t(d), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(d));
  FitResult res;
  res.converged = false;
  const double eta0 = 0.5 / (1.0 + c * double(diff.size()) / double(d + 1));
  for (int it = 0; it < iters; ++it) {
    for (int j = 0; j < d; ++j) grad[std::size_t(j)] = u[std::size_t(j)];
    for (const auto& v : diff) {
      double score = 0.0;
      for (int j = 0; j < d; ++j) score += u[std::size_t(j)] * v[std::size_t(j)];
      if (score < 1.0)
        for (int j = 0; j < d; ++j) grad[std::size_t(j)] -= c * v[std::size_t(j)];
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    if (std::sqrt(gnorm) <= 1e-8 * (1.0 + double(diff.size()))) {
      res.converged = true;
      break;
    }
    const double eta = eta0 / (1.0 + 0.05 * double(it));
    for (int j = 0; j < d; ++j) u[std::size_t(j)] -= eta * grad[std::size_t(j)];
  }
  res.u = std::move(u);
  return res;
}

}  // namespace

double ranksvm_objective(const SubSegment& seg, const std::vector<double>& u,
                         double c) {
  double obj = 0.0;
  for (double v : u) obj += 0.5 * v * v;
  const int T = seg.length();
  for (int a = 1; a < T; ++a)
    for (int b = 0; b < a; ++b) {
      double score = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j)
        score += u[j] * (seg.frames[std::size_t(a)][j] -
                         seg.frames[std::size_t(b)][j]);
      obj += c * std::max(0.0, 1.0 - score);
    }
  return obj;
}

FitResult fit_rank_pool(const SubSegment& seg, const RankPoolConfig& cfg) {
  if (seg.frames.empty()) fail(ErrorKind::validation, "rank pool: empty segment");
  check_finite(seg);
  const int d = seg.dim();
  for (const auto& f : seg.frames)
    if (int(f.size()) != d)
      fail(ErrorKind::validation, "rank pool: ragged segment");

  if (seg.length() == 1) {
    FitResult res;
    res.u = seg.frames[0];
    res.degenerate = true;
    return res;
  }

  // internal feature normalization; the returned u is rescaled back so the
  // result is equivariant to positive feature scaling
  const double rho = feature_scale(seg);
  if (rho == 0.0) {
    FitResult res;
    res.u.assign(std::size_t(d), 0.0);
    return res;
  }
  std::vector<std::vector<double>> x(seg.frames.begin(), seg.frames.end());
  for (auto& f : x)
    for (double& v : f) v /= rho;

  FitResult res;
  if (cfg.solver == Solver::svr) {
    const int T = seg.length();
    std::vector<double> y(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) y[std::size_t(t)] = double(t + 1) / double(T);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(T);
    for (double& v : y) v -= mean;
    res = solve_svr(x, y, cfg.c, cfg.epsilon_tube, cfg.iters, cfg.seed);
  } else {
    res = solve_ranksvm_subgrad(x, cfg.c, cfg.iters, cfg.seed);
  }
  for (double& v : res.u) v /= rho;
  for (double v : res.u)
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "rank pool: non-finite result");
  return res;
}

std::vector<DynamicMap> encode_video_dynamics(const data::VideoSequence& video,
                                              int segments, int epsilon,
                                              const RankPoolConfig& cfg) {
  if (video.frames.empty())
    fail(ErrorKind::validation, "dynamics: empty video");
  const int F = int(video.frames.size());
  const WindowPlan plan = compute_window_plan(F, segments, epsilon);

  // flattened frames, padded by repeating the last frame when F < H
  const std::size_t d =
      std::size_t(video.height) * video.width * video.channels;
  std::vector<std::vector<double>> feats(static_cast<std::size_t>(plan.padded_frames));
  for (int f = 0; f < plan.padded_frames; ++f) {
    const auto& src = video.frames[std::size_t(std::min(f, F - 1))];
    feats[std::size_t(f)].assign(src.begin(), src.end());
    if (feats[std::size_t(f)].size() != d)
      fail(ErrorKind::validation, "dynamics: ragged video frames");
  }

  std::vector<DynamicMap> maps(static_cast<std::size_t>(segments));
#pragma omp parallel for schedule(dynamic) if (threading::parallel())
  for (int h = 0; h < segments; ++h) {
    const int start = plan.starts[std::size_t(h)];
    SubSegment seg;
    seg.frames.assign(feats.begin() + (start - 1),
                      feats.begin() + (start - 1) + plan.window);
    const SubSegment smoothed = smooth_segment(seg, cfg.smoothing);
    const FitResult fit = fit_rank_pool(smoothed, cfg);

    nn::Tensor m({video.height, video.width, video.channels});
    double lo = fit.u.empty() ? 0.0 : fit.u[0], hi = lo;
    for (double v : fit.u) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < m.data.size(); ++i)
      m.data[i] = range > 0.0 ? (fit.u[i] - lo) / range : 0.5;
    maps[std::size_t(h)].map = std::move(m);
    maps[std::size_t(h)].segment_index = h;
    maps[std::size_t(h)].converged = fit.converged || fit.degenerate;
  }
  return maps;
}

}  // namespace mvact::rank
