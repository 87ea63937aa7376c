#include "mvact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mvact/common.hpp"

namespace fs = std::filesystem;

namespace mvact::synth {

using data::BodyJoints;
using data::Joint3D;
using data::Modality;
using data::SkeletonFrame;
using data::SkeletonSequence;
using data::VideoSequence;
using data::View;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSideAngle = kPi / 4.0;  // 45 degree side camera

// canonical standing pose, meters; kinect-v2 joint order
const double kBasePose[data::kJointsPerBody][3] = {
    {0.00, 0.95, 0.00},   // spine base
    {0.00, 1.20, 0.00},   // spine mid
    {0.00, 1.45, 0.00},   // neck
    {0.00, 1.60, 0.00},   // head
    {-0.20, 1.40, 0.00},  // shoulder l
    {-0.30, 1.15, 0.00},  // elbow l
    {-0.35, 0.95, 0.00},  // wrist l
    {-0.37, 0.88, 0.00},  // hand l
    {0.20, 1.40, 0.00},   // shoulder r
    {0.30, 1.15, 0.00},   // elbow r
    {0.35, 0.95, 0.00},   // wrist r
    {0.37, 0.88, 0.00},   // hand r
    {-0.10, 0.90, 0.00},  // hip l
    {-0.12, 0.50, 0.00},  // knee l
    {-0.13, 0.10, 0.00},  // ankle l
    {-0.14, 0.02, 0.05},  // foot l
    {0.10, 0.90, 0.00},   // hip r
    {0.12, 0.50, 0.00},   // knee r
    {0.13, 0.10, 0.00},   // ankle r
    {0.14, 0.02, 0.05},   // foot r
    {0.00, 1.38, 0.00},   // spine shoulder
    {-0.39, 0.82, 0.00},  // hand tip l
    {-0.33, 0.86, 0.03},  // thumb l
    {0.39, 0.82, 0.00},   // hand tip r
    {0.33, 0.86, 0.03},   // thumb r
};

std::string sample_name(int group, int cls, int rep) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "g%03d_a%02d_r%d", group, cls, rep);
  return buf;
}

// class/joint-keyed unit direction and phase
void class_joint_motion(std::uint64_t seed, int cls, int joint, double dir[3],
                        double* phase, bool* moving) {
  mvact::Rng rng = mvact::Rng(seed).fork({0xC1A55ull, std::uint64_t(cls),
                                          std::uint64_t(joint)});
  const double theta = rng.uniform(0.0, 2.0 * kPi);
  const double phi = rng.uniform(-0.5, 0.5);
  dir[0] = std::cos(theta) * std::cos(phi);
  dir[1] = std::sin(phi);
  dir[2] = std::sin(theta) * std::cos(phi);
  *phase = rng.uniform(0.0, 2.0 * kPi);
  // each class animates its own two-thirds of the joints
  *moving = ((joint + 2 * cls) % 3) != 0;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.classes < 1 || cfg.classes > data::kNumClasses)
    fail(ErrorKind::config, "synth: classes must be in [1,30]");
  if (cfg.groups < 1 || cfg.groups > data::kNumGroups)
    fail(ErrorKind::config, "synth: groups must be in [1,89]");
  if (cfg.repeats < 1) fail(ErrorKind::config, "synth: repeats must be >= 1");
  if (cfg.min_frames < 2 || cfg.max_frames < cfg.min_frames)
    fail(ErrorKind::config, "synth: need 2 <= min_frames <= max_frames");
  if (cfg.image_size < 8) fail(ErrorKind::config, "synth: image_size too small");
  if (cfg.bodies < 1 || cfg.bodies > 2)
    fail(ErrorKind::config, "synth: bodies must be 1 or 2");
  if (!cfg.class_frequencies_hz.empty() &&
      int(cfg.class_frequencies_hz.size()) != cfg.classes)
    fail(ErrorKind::config, "synth: class_frequencies_hz size mismatch");
  if (cfg.fps <= 0) fail(ErrorKind::config, "synth: fps must be positive");
}

double class_frequency(const SynthConfig& cfg, int class_id) {
  if (!cfg.class_frequencies_hz.empty())
    return cfg.class_frequencies_hz[std::size_t(class_id - 1)];
  return 0.5 + 0.25 * double(class_id - 1);
}

SkeletonSequence synth_skeleton(const SynthConfig& cfg, std::uint64_t seed,
                                int class_id, int group_id, int repeat) {
  validate(cfg);
  mvact::Rng group_rng = mvact::Rng(seed).fork({0x6A0Full, std::uint64_t(group_id)});
  const double gx = group_rng.uniform(-0.12, 0.12);
  const double gz = group_rng.uniform(-0.12, 0.12);
  const double amp_scale = 1.0 + group_rng.uniform(-0.1, 0.1);

  mvact::Rng sample_rng = mvact::Rng(seed).fork(
      {0x5A3D1ull, std::uint64_t(class_id), std::uint64_t(group_id),
       std::uint64_t(repeat)});
  const int frames =
      cfg.min_frames +
      int(sample_rng.below(std::uint64_t(cfg.max_frames - cfg.min_frames + 1)));

  const double freq = class_frequency(cfg, class_id);
  const double amp = 0.22 * amp_scale;

  SkeletonSequence seq;
  seq.view = View::front;
  seq.class_id = class_id;
  seq.group_id = group_id;
  seq.sample_id = sample_name(group_id, class_id, repeat);
  seq.frames.reserve(std::size_t(frames));

  for (int t = 0; t < frames; ++t) {
    SkeletonFrame fr;
    fr.timestamp_index = t;
    for (int b = 0; b < cfg.bodies; ++b) {
      BodyJoints joints{};
      const double mirror = (b == 0) ? 1.0 : -1.0;
      const double offset_x = (cfg.bodies == 2) ? (b == 0 ? -0.45 : 0.45) : 0.0;
      for (int j = 0; j < data::kJointsPerBody; ++j) {
        double dir[3], phase;
        bool moving;
        class_joint_motion(seed, class_id, j, dir, &phase, &moving);
        const double osc =
            moving ? amp * std::sin(2.0 * kPi * freq * (t / cfg.fps) + phase +
                                    double(b) * kPi)
                   : 0.0;
        mvact::Rng noise = sample_rng.fork({std::uint64_t(t), std::uint64_t(b),
                                            std::uint64_t(j)});
        Joint3D p;
        p.x = mirror * kBasePose[j][0] + offset_x + gx + osc * dir[0] +
              0.004 * noise.normal();
        p.y = kBasePose[j][1] + osc * dir[1] + 0.004 * noise.normal();
        p.z = gz + osc * dir[2] + 0.004 * noise.normal();
        joints[std::size_t(j)] = p;
      }
      fr.bodies.push_back(joints);
    }
    seq.frames.push_back(std::move(fr));
  }
  return seq;
}

SkeletonSequence rotate_to_side(const SkeletonSequence& front) {
  SkeletonSequence side = front;
  side.view = View::side;
  const double c = std::cos(kSideAngle), s = std::sin(kSideAngle);
  for (auto& fr : side.frames)
    for (auto& body : fr.bodies)
      for (auto& j : body) {
        const double x = j.x, z = j.z;
        j.x = c * x + s * z;
        j.z = -s * x + c * z;
      }
  return side;
}

namespace {

struct Projected {
  double u, v;    // pixel coordinates
  double depth;   // meters from the camera
};

Projected project(const Joint3D& j, View view, const Joint3D& fpv_head,
                  int size) {
  double px = 0, py = 0, depth = 0;
  switch (view) {
    case View::front:
      px = j.x;
      py = j.y - 0.8;
      depth = 2.5 - j.z;
      break;
    case View::side: {
      const double c = std::cos(kSideAngle), s = std::sin(kSideAngle);
      px = c * j.x + s * j.z;
      py = j.y - 0.8;
      depth = 2.5 - (-s * j.x + c * j.z);
      break;
    }
    case View::top:
      px = j.x;
      py = j.z;
      depth = 2.4 - j.y;
      break;
    case View::fpv: {
      const double dx = j.x - fpv_head.x;
      const double dy = j.y - fpv_head.y;
      const double dz = j.z - fpv_head.z;
      px = 1.5 * dx;
      py = 1.5 * dy + 0.35;
      depth = std::sqrt(dx * dx + dy * dy + dz * dz);
      break;
    }
  }
  const double span = 2.6;  // world metres across the frame
  Projected out;
  out.u = (px / span + 0.5) * (size - 1);
  out.v = (0.5 - py / span) * (size - 1);
  out.depth = depth;
  return out;
}

double depth_intensity(double depth, View view) {
  double near = 1.5, far = 3.5;
  if (view == View::top) near = 0.5, far = 2.5;
  if (view == View::fpv) near = 0.0, far = 2.0;
  const double t = (far - depth) / (far - near);
  return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

}  // namespace

VideoSequence render_video(const SkeletonSequence& world, int image_size,
                           View view, Modality modality) {
  if (modality == Modality::skeleton)
    fail(ErrorKind::validation, "render_video: modality must be rgb or depth");
  const int S = image_size;
  const int C = modality == Modality::rgb ? 3 : 1;
  const double sigma = double(S) / 24.0;
  const double body_color[2][3] = {{1.0, 0.7, 0.3}, {0.3, 0.7, 1.0}};

  VideoSequence v;
  v.height = S;
  v.width = S;
  v.channels = C;
  v.view = view;
  v.modality = modality;
  v.sample_id = world.sample_id;
  v.class_id = world.class_id;
  v.group_id = world.group_id;
  v.frames.reserve(world.frames.size());

  for (const auto& fr : world.frames) {
    // the first-person camera rides on the last body's head joint
    const Joint3D head = fr.bodies.back()[3];
    std::vector<float> img(std::size_t(S) * S * C, 0.0f);
    for (std::size_t b = 0; b < fr.bodies.size(); ++b) {
      for (int j = 0; j < data::kJointsPerBody; ++j) {
        const Projected p = project(fr.bodies[b][std::size_t(j)], view, head, S);
        const double inten = depth_intensity(p.depth, view);
        const int u0 = std::max(0, int(p.u - 3 * sigma));
        const int u1 = std::min(S - 1, int(p.u + 3 * sigma) + 1);
        const int v0 = std::max(0, int(p.v - 3 * sigma));
        const int v1 = std::min(S - 1, int(p.v + 3 * sigma) + 1);
        for (int y = v0; y <= v1; ++y)
          for (int x = u0; x <= u1; ++x) {
            const double d2 = (x - p.u) * (x - p.u) + (y - p.v) * (y - p.v);
            const double g = std::exp(-d2 / (2.0 * sigma * sigma));
            float* px = img.data() + (std::size_t(y) * S + x) * C;
            if (modality == Modality::rgb) {
              for (int c = 0; c < 3; ++c) {
                const double add = g * body_color[b % 2][c];
                px[c] = float(std::min(1.0, double(px[c]) + add));
              }
            } else {
              // nearest blob wins: distance-coded intensity
              px[0] = float(std::max(double(px[0]), g * inten));
            }
          }
      }
    }
    v.frames.push_back(std::move(img));
  }
  return v;
}

data::DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg,
                                                 std::uint64_t seed) {
  validate(cfg);
  if (cfg.out_dir.empty()) fail(ErrorKind::config, "synth: out_dir required");
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (!fs::is_directory(cfg.out_dir))
    fail(ErrorKind::io, "synth: cannot create output directory " + cfg.out_dir);

  data::DatasetManifest manifest;
  manifest.base_dir = cfg.out_dir;

  data::TfPairing pairing;
  pairing.note = "synthetic default assignment: test groups are multiples of 4";

  for (int cls = 1; cls <= cfg.classes; ++cls) {
    for (int g = 1; g <= cfg.groups; ++g) {
      for (int r = 1; r <= cfg.repeats; ++r) {
        const SkeletonSequence front = synth_skeleton(cfg, seed, cls, g, r);
        const std::string id = front.sample_id;
        const int frames = int(front.frames.size());

        auto add_entry = [&](View view, Modality mo, const std::string& rel) {
          data::ManifestEntry e;
          e.sample_id = id;
          e.class_id = cls;
          e.group_id = g;
          e.view = view;
          e.modality = mo;
          e.path = rel;
          e.frame_count = frames;
          manifest.entries.push_back(std::move(e));
        };

        if (cfg.skeletons) {
          const SkeletonSequence side = rotate_to_side(front);
          const std::string rel_f = "skeleton/front/" + id + ".skel";
          const std::string rel_s = "skeleton/side/" + id + ".skel";
          data::write_skeleton_file(front, (fs::path(cfg.out_dir) / rel_f).string());
          data::write_skeleton_file(side, (fs::path(cfg.out_dir) / rel_s).string());
          add_entry(View::front, Modality::skeleton, rel_f);
          add_entry(View::side, Modality::skeleton, rel_s);
        }
        if (cfg.videos) {
          for (View view : cfg.video_views) {
            for (Modality mo : {Modality::rgb, Modality::depth}) {
              VideoSequence vid = render_video(front, cfg.image_size, view, mo);
              vid.sample_id = id;
              const std::string rel = std::string("video/") +
                                      data::view_name(view) + "_" +
                                      data::modality_name(mo) + "/" + id +
                                      ".vbin";
              data::save_video(vid, (fs::path(cfg.out_dir) / rel).string());
              add_entry(view, mo, rel);
            }
          }
        }
        if (g % 4 == 0)
          pairing.test.push_back(id);
        else
          pairing.train.push_back(id);
      }
    }
  }

  data::save_manifest(manifest, (fs::path(cfg.out_dir) / "manifest.json").string());
  std::sort(pairing.train.begin(), pairing.train.end());
  std::sort(pairing.test.begin(), pairing.test.end());
  data::save_pairing(pairing, (fs::path(cfg.out_dir) / "pairing.json").string());
  // reload so entry order and base_dir match what consumers will see
  return data::load_manifest((fs::path(cfg.out_dir) / "manifest.json").string());
}

}  // namespace mvact::synth
