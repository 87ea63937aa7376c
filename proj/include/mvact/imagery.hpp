#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvact/data_model.hpp"
#include "mvact/tensor.hpp"

namespace mvact::imagery {

// Five joint-index chains over the 25-joint skeleton plus the spatial
// upsample factor (intermediate joints per chain edge) and the temporal
// target length.
struct BodyPartLayout {
  std::vector<std::vector<int>> chains;
  int upsample = 2;       // intermediate joints inserted per edge
  int target_frames = 64;

  static BodyPartLayout default_layout();
  int chain_edges() const;
  int joints_per_body() const;  // 25 + upsample * edges
  void validate() const;
};

struct PseudoImage {
  nn::Tensor data;  // [F', J', 3], values in [0,1]
  // the min-max map per coordinate channel, kept so it can be inverted
  std::array<double, 3> channel_min{};
  std::array<double, 3> channel_max{};
  std::string sample_id;
  data::View view = data::View::front;
  int class_id = 0;
  int group_id = 0;
};

// Dense image-like encoding of a skeleton sequence: per body part, spatial
// spline insertion along each chain; then per joint, temporal spline
// resampling to target_frames; bodies concatenated along the joint axis;
// min-max normalization per coordinate channel.
PseudoImage map_sequence_to_image(const data::SkeletonSequence& seq,
                                  const BodyPartLayout& layout);

// flat binary block: 3 little-endian int32 dims + row-major float32
void save_block(const nn::Tensor& t, const std::string& path);
nn::Tensor load_block(const std::string& path);

}  // namespace mvact::imagery
