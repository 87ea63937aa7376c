#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mvact::data {

constexpr int kJointsPerBody = 25;
constexpr int kNumClasses = 30;
constexpr int kNumGroups = 89;

// collection census: events recorded by the fixed third-person cameras,
// first-person segments, and the subset paired across all four views
constexpr int kCensusTpvEvents = 9882;
constexpr int kCensusFpvEvents = 8718;
constexpr int kCensusPairedEvents = 8414;
constexpr int kCensusPairedTrain = 5528;
constexpr int kCensusPairedTest = 2886;

enum class View { front, side, top, fpv };
enum class Modality { rgb, depth, skeleton };

const char* view_name(View v);
const char* modality_name(Modality m);
View parse_view(const std::string& s);
Modality parse_modality(const std::string& s);

struct Joint3D {
  double x = 0.0, y = 0.0, z = 0.0;
  bool finite() const;
};

using BodyJoints = std::array<Joint3D, kJointsPerBody>;

struct SkeletonFrame {
  std::vector<BodyJoints> bodies;  // 1..2 after validation padding
  int timestamp_index = 0;
};

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  View view = View::front;
  std::string sample_id;
  int class_id = 0;  // 0 while metadata is unattached
  int group_id = 0;
  bool padded = false;  // some frame was zero-padded to the body count

  int body_count() const { return frames.empty() ? 0 : int(frames[0].bodies.size()); }
};

// checks structure; metadata ranges only when with_metadata
void validate_sequence(const SkeletonSequence& seq, bool with_metadata);

// Frames stored row-major [H,W,C], values in [0,1].
struct VideoSequence {
  int height = 0, width = 0, channels = 0;
  std::vector<std::vector<float>> frames;
  View view = View::front;
  Modality modality = Modality::rgb;
  std::string sample_id;
  int class_id = 0;
  int group_id = 0;
};

struct ManifestEntry {
  std::string sample_id;
  int class_id = 0;
  int group_id = 0;
  View view = View::front;
  Modality modality = Modality::rgb;
  std::string path;  // relative to the manifest location unless absolute
  int frame_count = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;  // directory the manifest was loaded from

  std::string resolve_path(const ManifestEntry& e) const;
};

enum class Protocol { cs_first, cs_second, cross_view, tf_combined };
const char* protocol_name(Protocol p);
Protocol parse_protocol(const std::string& s);

// Split identifiers are view-qualified: "<sample_id>@<view>". One identifier
// covers every modality of that view-sample.
std::string split_key(const std::string& sample_id, View v);

struct ProtocolSplit {
  Protocol protocol = Protocol::cs_first;
  std::vector<std::string> train_ids, test_ids;  // sorted, disjoint
  std::vector<std::string> warnings;

  bool in_train(const std::string& key) const;
  bool in_test(const std::string& key) const;
};

// ---- skeleton text format --------------------------------------------
//
//   FTHID-SKEL 1 <F> <B>
//   <frame> <body> <joint> <x> <y> <z>     (blocks of 25 joints)
//
// A frame may omit a body slot; parsing pads it with a zero body and sets
// the padded flag. Metadata (view/ids) is not part of the file.
SkeletonSequence parse_skeleton_file(const std::string& path);
SkeletonSequence parse_skeleton_text(const std::string& text,
                                     const std::string& origin);
void write_skeleton_file(const SkeletonSequence& seq, const std::string& path);
std::string skeleton_to_text(const SkeletonSequence& seq);

// ---- raw video blocks: 4 LE int32 dims [F,H,W,C] + float32 -----------

VideoSequence load_video(const std::string& path);
void save_video(const VideoSequence& video, const std::string& path);

// ---- manifest / split / pairing JSON ----------------------------------

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);
void validate_manifest(const DatasetManifest& m, bool check_paths);
DatasetManifest filter_views(const DatasetManifest& m,
                             const std::set<View>& keep);

SkeletonSequence load_skeleton_sample(const DatasetManifest& m,
                                      const ManifestEntry& e);
VideoSequence load_video_sample(const DatasetManifest& m,
                                const ManifestEntry& e);

void save_split(const ProtocolSplit& s, const std::string& path);
ProtocolSplit load_split(const std::string& path);

struct TfPairing {
  std::vector<std::string> train, test;  // event sample ids
  std::string note;
};

TfPairing load_pairing(const std::string& path);
void save_pairing(const TfPairing& p, const std::string& path);

// ---- the three evaluation protocols ------------------------------------

ProtocolSplit split_cs_first(const DatasetManifest& m);
ProtocolSplit split_cs_second(const DatasetManifest& m);
ProtocolSplit split_cross_view(const DatasetManifest& m);
ProtocolSplit split_tf_combined(const DatasetManifest& m, const TfPairing& p);

ProtocolSplit run_protocol(Protocol p, const DatasetManifest& m,
                           const std::optional<TfPairing>& pairing);

// ---- census replica ----------------------------------------------------
//
// A manifest with the collection's exact sample counts (no media on disk;
// paths are nominal). Used to exercise the protocol arithmetic at full
// scale.
DatasetManifest census_manifest();
TfPairing census_default_pairing();

}  // namespace mvact::data
