#include "mvact/imagery.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "mvact/common.hpp"
#include "mvact/spline.hpp"
#include "mvact/threading.hpp"

namespace mvact::imagery {

using data::Joint3D;
using data::SkeletonSequence;
using nn::Tensor;

BodyPartLayout BodyPartLayout::default_layout() {
  BodyPartLayout l;
  // kinect-v2 indices; trunk, arms with hand tips/thumbs, legs
  l.chains = {
      {0, 1, 20, 2, 3},        // trunk: spine base..head
      {4, 5, 6, 7, 21, 22},    // left arm
      {8, 9, 10, 11, 23, 24},  // right arm
      {12, 13, 14, 15},        // left leg
      {16, 17, 18, 19},        // right leg
  };
  l.upsample = 2;
  l.target_frames = 64;
  return l;
}

int BodyPartLayout::chain_edges() const {
  int e = 0;
  for (const auto& c : chains) e += int(c.size()) - 1;
  return e;
}

int BodyPartLayout::joints_per_body() const {
  return data::kJointsPerBody + upsample * chain_edges();
}

void BodyPartLayout::validate() const {
  if (upsample < 0) fail(ErrorKind::validation, "layout: upsample must be >= 0");
  if (target_frames < 2)
    fail(ErrorKind::validation, "layout: target_frames must be >= 2");
  std::set<int> covered;
  for (const auto& c : chains) {
    if (c.size() < 2) fail(ErrorKind::validation, "layout: chain too short");
    for (int j : c) {
      if (j < 0 || j >= data::kJointsPerBody)
        fail(ErrorKind::validation, "layout: joint index out of range");
      covered.insert(j);
    }
  }
  if (int(covered.size()) != data::kJointsPerBody)
    fail(ErrorKind::validation, "layout: chains must cover all 25 joints");
}

namespace {

// spatially expanded joints for one body in one frame: the 25 originals
// followed by the inserted points in chain/edge order
void expand_body(const data::BodyJoints& body, const BodyPartLayout& layout,
                 std::vector<Joint3D>& out) {
  out.assign(body.begin(), body.end());
  if (layout.upsample == 0) return;
  const int p = layout.upsample;
  for (const auto& chain : layout.chains) {
    const int len = int(chain.size());
    // uniform chain-index parameterization; arc length degenerates for
    // zero-padded bodies so it is not used
    std::vector<double> pos(static_cast<std::size_t>(len));
    std::vector<double> qs;
    qs.reserve(std::size_t((len - 1) * p));
    for (int k = 0; k < len; ++k) pos[std::size_t(k)] = double(k);
    for (int k = 0; k + 1 < len; ++k)
      for (int i = 1; i <= p; ++i)
        qs.push_back(double(k) + double(i) / double(p + 1));

    std::vector<double> coord(static_cast<std::size_t>(len));
    std::array<std::vector<double>, 3> interp;
    for (int axis = 0; axis < 3; ++axis) {
      for (int k = 0; k < len; ++k) {
        const Joint3D& j = body[std::size_t(chain[std::size_t(k)])];
        coord[std::size_t(k)] = axis == 0 ? j.x : (axis == 1 ? j.y : j.z);
      }
      interp[std::size_t(axis)] = interp::spline_interpolate(pos, coord, qs);
    }
    for (std::size_t q = 0; q < qs.size(); ++q)
      out.push_back(Joint3D{interp[0][q], interp[1][q], interp[2][q]});
  }
}

}  // namespace

PseudoImage map_sequence_to_image(const SkeletonSequence& seq,
                                  const BodyPartLayout& layout) {
  layout.validate();
  data::validate_sequence(seq, false);
  const int F = int(seq.frames.size());
  if (F < 2)
    fail(ErrorKind::degenerate,
         "imagery: need at least 2 frames, got " + std::to_string(F));
  const int B = seq.body_count();
  const int jb = layout.joints_per_body();
  const int J = B * jb;
  const int Fp = layout.target_frames;

  // spatial pass: [frame][body-expanded joints]
  std::vector<std::vector<Joint3D>> spatial(static_cast<std::size_t>(F));
  for (int f = 0; f < F; ++f) {
    spatial[std::size_t(f)].reserve(std::size_t(J));
    std::vector<Joint3D> one;
    for (int b = 0; b < B; ++b) {
      expand_body(seq.frames[std::size_t(f)].bodies[std::size_t(b)], layout, one);
      spatial[std::size_t(f)].insert(spatial[std::size_t(f)].end(), one.begin(),
                                     one.end());
    }
  }

  // temporal pass: each joint trajectory resampled to Fp frames
  std::vector<double> knots(static_cast<std::size_t>(F));
  for (int f = 0; f < F; ++f) knots[std::size_t(f)] = double(f);
  std::vector<double> queries(static_cast<std::size_t>(Fp));
  for (int i = 0; i < Fp; ++i)
    queries[std::size_t(i)] = double(i) * double(F - 1) / double(Fp - 1);

  Tensor out({Fp, J, 3});
#pragma omp parallel for schedule(static) if (threading::parallel())
  for (int j = 0; j < J; ++j) {
    std::vector<double> local(static_cast<std::size_t>(F));
    for (int axis = 0; axis < 3; ++axis) {
      for (int f = 0; f < F; ++f) {
        const Joint3D& p = spatial[std::size_t(f)][std::size_t(j)];
        local[std::size_t(f)] = axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
      }
      const auto vals = interp::spline_interpolate(knots, local, queries);
      for (int i = 0; i < Fp; ++i)
        out.data[(std::size_t(i) * J + j) * 3 + axis] = vals[std::size_t(i)];
    }
  }

  // min-max per coordinate channel over the whole resampled sequence
  PseudoImage img;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = out.data[std::size_t(axis)], hi = lo;
    for (int i = 0; i < Fp; ++i)
      for (int j = 0; j < J; ++j) {
        const double v = out.data[(std::size_t(i) * J + j) * 3 + axis];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    img.channel_min[std::size_t(axis)] = lo;
    img.channel_max[std::size_t(axis)] = hi;
    const double range = hi - lo;
    for (int i = 0; i < Fp; ++i)
      for (int j = 0; j < J; ++j) {
        double& v = out.data[(std::size_t(i) * J + j) * 3 + axis];
        v = range > 0.0 ? (v - lo) / range : 0.5;
      }
  }
  img.data = std::move(out);
  img.sample_id = seq.sample_id;
  img.view = seq.view;
  img.class_id = seq.class_id;
  img.group_id = seq.group_id;
  if (!img.data.all_finite())
    fail(ErrorKind::numeric, "imagery: non-finite value in pseudo-image");
  return img;
}

void save_block(const Tensor& t, const std::string& path) {
  if (t.ndim() != 3)
    fail(ErrorKind::shape, "block: tensor must be 3-d, got " + nn::shape_str(t.shape));
  std::string out;
  for (int d = 0; d < 3; ++d) {
    const std::uint32_t v = std::uint32_t(t.dim(d));
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
  }
  const std::size_t off = out.size();
  out.resize(off + t.data.size() * sizeof(float));
  float* dst = reinterpret_cast<float*>(out.data() + off);
  for (std::size_t i = 0; i < t.data.size(); ++i) dst[i] = float(t.data[i]);
  write_binary_file(path, out.data(), out.size());
}

Tensor load_block(const std::string& path) {
  auto bytes = read_binary_file(path);
  if (bytes.size() < 12) fail(ErrorKind::parse, path + ": truncated block");
  int dims[3];
  for (int d = 0; d < 3; ++d) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t(bytes[std::size_t(d * 4 + i)]) << (8 * i);
    dims[d] = int(v);
    if (dims[d] <= 0) fail(ErrorKind::parse, path + ": bad block dims");
  }
  const std::size_t n = std::size_t(dims[0]) * dims[1] * dims[2];
  if (bytes.size() != 12 + n * sizeof(float))
    fail(ErrorKind::parse, path + ": block payload size mismatch");
  Tensor t({dims[0], dims[1], dims[2]});
  const float* src = reinterpret_cast<const float*>(bytes.data() + 12);
  for (std::size_t i = 0; i < n; ++i) t.data[i] = double(src[i]);
  return t;
}

}  // namespace mvact::imagery
