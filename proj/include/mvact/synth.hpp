#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvact/data_model.hpp"

namespace mvact::synth {

// Deterministic stand-in for the recorded collection. Class identity is
// carried by per-class sinusoidal joint trajectories (frequency, phase,
// amplitude pattern); groups perturb pose and amplitude; repeats add seeded
// jitter. The side view is the front view under a fixed rigid rotation.
struct SynthConfig {
  int classes = 6;  // <= 30
  int groups = 12;  // <= 89
  int repeats = 2;
  int min_frames = 48;
  int max_frames = 72;
  int image_size = 32;
  int bodies = 2;
  bool skeletons = true;
  bool videos = true;
  std::vector<data::View> video_views = {data::View::front, data::View::side,
                                         data::View::top, data::View::fpv};
  std::vector<double> class_frequencies_hz;  // optional, size == classes
  double fps = 25.0;
  std::string out_dir;
};

void validate(const SynthConfig& cfg);

double class_frequency(const SynthConfig& cfg, int class_id);

// world-space motion for one sample (front-view coordinates)
data::SkeletonSequence synth_skeleton(const SynthConfig& cfg,
                                      std::uint64_t seed, int class_id,
                                      int group_id, int repeat);

// fixed rigid rotation about the vertical axis (the side camera placement)
data::SkeletonSequence rotate_to_side(const data::SkeletonSequence& front);

data::VideoSequence render_video(const data::SkeletonSequence& world,
                                 int image_size, data::View view,
                                 data::Modality modality);

// Writes skeleton files (front, side), rendered videos, manifest.json and
// pairing.json under cfg.out_dir; returns the manifest. Pure function of
// (cfg, seed).
data::DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg,
                                                 std::uint64_t seed);

}  // namespace mvact::synth
