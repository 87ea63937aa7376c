#pragma once

#include <cstdint>
#include <vector>

#include "mvact/data_model.hpp"
#include "mvact/tensor.hpp"

namespace mvact::rank {

// Adaptive sub-segment plan: H fixed windows whose size/stride depend on
// whether the sequence is shorter than the threshold. Starts are 1-based.
struct WindowPlan {
  int frames = 0;         // input length F
  int padded_frames = 0;  // F after repeat-last padding when F < H
  int segments = 0;       // H
  int window = 0;         // w
  int stride = 0;         // s
  std::vector<int> starts;
};

WindowPlan compute_window_plan(int frames, int segments, int epsilon);

enum class Smoothing { none, running_mean };
enum class Solver { svr, ranksvm_subgrad };

struct RankPoolConfig {
  Solver solver = Solver::svr;
  double c = 1.0;
  double epsilon_tube = 0.1;
  int iters = 4000;
  std::uint64_t seed = 0;
  Smoothing smoothing = Smoothing::running_mean;
};

// ordered frame feature vectors of one temporal window
struct SubSegment {
  std::vector<std::vector<double>> frames;  // T x d

  int length() const { return int(frames.size()); }
  int dim() const { return frames.empty() ? 0 : int(frames[0].size()); }
};

SubSegment smooth_segment(const SubSegment& seg, Smoothing mode);

struct FitResult {
  std::vector<double> u;
  bool converged = true;
  bool degenerate = false;  // single-frame window: u is the frame itself
};

// Learns the linear ranking direction for one segment. svr regresses the
// centered normalized time index onto the features by dual coordinate
// descent; ranksvm_subgrad minimizes the hinge objective over all ordered
// frame pairs by subgradient descent. Both are deterministic given inputs.
FitResult fit_rank_pool(const SubSegment& seg, const RankPoolConfig& cfg);

// value of the pairwise ranking objective 0.5|u|^2 + C * sum hinge; shared
// with the tests' brute-force search
double ranksvm_objective(const SubSegment& seg, const std::vector<double>& u,
                         double c);

struct DynamicMap {
  nn::Tensor map;  // frame geometry [h,w,c], min-max normalized to [0,1]
  int segment_index = 0;
  bool converged = true;
};

std::vector<DynamicMap> encode_video_dynamics(const data::VideoSequence& video,
                                              int segments, int epsilon,
                                              const RankPoolConfig& cfg);

}  // namespace mvact::rank
