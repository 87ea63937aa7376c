#include "mvact/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "mvact/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvact::data {

const char* view_name(View v) {
  switch (v) {
    case View::front: return "front";
    case View::side: return "side";
    case View::top: return "top";
    case View::fpv: return "fpv";
  }
  return "?";
}

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::rgb: return "rgb";
    case Modality::depth: return "depth";
    case Modality::skeleton: return "skeleton";
  }
  return "?";
}

View parse_view(const std::string& s) {
  if (s == "front") return View::front;
  if (s == "side") return View::side;
  if (s == "top") return View::top;
  if (s == "fpv") return View::fpv;
  fail(ErrorKind::parse, "unknown view '" + s + "'");
}

Modality parse_modality(const std::string& s) {
  if (s == "rgb") return Modality::rgb;
  if (s == "depth") return Modality::depth;
  if (s == "skeleton") return Modality::skeleton;
  fail(ErrorKind::parse, "unknown modality '" + s + "'");
}

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::cs_first: return "cs_first";
    case Protocol::cs_second: return "cs_second";
    case Protocol::cross_view: return "cross_view";
    case Protocol::tf_combined: return "tf_combined";
  }
  return "?";
}

Protocol parse_protocol(const std::string& s) {
  if (s == "cs_first") return Protocol::cs_first;
  if (s == "cs_second") return Protocol::cs_second;
  if (s == "cross_view") return Protocol::cross_view;
  if (s == "tf_combined") return Protocol::tf_combined;
  fail(ErrorKind::parse, "unknown protocol '" + s + "'");
}

bool Joint3D::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

std::string split_key(const std::string& sample_id, View v) {
  return sample_id + "@" + view_name(v);
}

bool ProtocolSplit::in_train(const std::string& key) const {
  return std::binary_search(train_ids.begin(), train_ids.end(), key);
}

bool ProtocolSplit::in_test(const std::string& key) const {
  return std::binary_search(test_ids.begin(), test_ids.end(), key);
}

void validate_sequence(const SkeletonSequence& seq, bool with_metadata) {
  if (seq.frames.empty())
    fail(ErrorKind::validation, "skeleton sequence has no frames");
  const std::size_t bodies = seq.frames[0].bodies.size();
  if (bodies < 1 || bodies > 2)
    fail(ErrorKind::validation, "body count must be 1 or 2, got " +
                                    std::to_string(bodies));
  int prev_ts = -1;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const SkeletonFrame& fr = seq.frames[f];
    if (fr.bodies.size() != bodies)
      fail(ErrorKind::validation,
           "frame " + std::to_string(f + 1) + " has inconsistent body count");
    if (fr.timestamp_index <= prev_ts)
      fail(ErrorKind::validation, "frame indices not strictly increasing");
    prev_ts = fr.timestamp_index;
    for (const BodyJoints& b : fr.bodies)
      for (const Joint3D& j : b)
        if (!j.finite())
          fail(ErrorKind::structural, "non-finite joint in frame " +
                                          std::to_string(f + 1));
  }
  if (with_metadata) {
    if (seq.class_id < 1 || seq.class_id > kNumClasses)
      fail(ErrorKind::validation,
           "class_id " + std::to_string(seq.class_id) + " outside [1," +
               std::to_string(kNumClasses) + "]");
    if (seq.group_id < 1 || seq.group_id > kNumGroups)
      fail(ErrorKind::validation,
           "group_id " + std::to_string(seq.group_id) + " outside [1," +
               std::to_string(kNumGroups) + "]");
  }
}

// ------------------------------------------------------------- skeleton io

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& msg) {
  fail(ErrorKind::parse,
       origin + ":" + std::to_string(line) + ": " + msg);
}

bool body_is_zero(const BodyJoints& b) {
  for (const Joint3D& j : b)
    if (j.x != 0.0 || j.y != 0.0 || j.z != 0.0) return false;
  return true;
}

}  // namespace

SkeletonSequence parse_skeleton_text(const std::string& text,
                                     const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) parse_fail(origin, 1, "empty file");
  ++line_no;
  int version = 0, frame_count = 0, body_slots = 0;
  {
    std::istringstream hdr(line);
    std::string magic;
    if (!(hdr >> magic >> version >> frame_count >> body_slots) ||
        magic != "FTHID-SKEL")
      parse_fail(origin, 1, "expected 'FTHID-SKEL <version> <F> <B>' header");
    std::string rest;
    if (hdr >> rest) parse_fail(origin, 1, "trailing tokens in header");
  }
  if (version != 1) parse_fail(origin, 1, "unsupported version " + std::to_string(version));
  if (frame_count < 1)
    fail(ErrorKind::structural, origin + ": frame count must be >= 1");
  if (body_slots < 1 || body_slots > 2)
    fail(ErrorKind::structural, origin + ": body slots must be 1 or 2");

  // per frame: body index -> joints seen so far
  std::vector<std::map<int, std::vector<Joint3D>>> frames(
      static_cast<std::size_t>(frame_count));

  int cur_frame = 1, cur_body = -1, expected_joint = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int frame = 0, body = 0, joint = 0;
    double x = 0, y = 0, z = 0;
    if (!(ls >> frame >> body >> joint >> x >> y >> z))
      parse_fail(origin, line_no, "expected '<frame> <body> <joint> <x> <y> <z>'");
    std::string rest;
    if (ls >> rest) parse_fail(origin, line_no, "trailing tokens");

    if (frame < 1 || frame > frame_count)
      fail(ErrorKind::structural, origin + ":" + std::to_string(line_no) +
                                      ": frame index " + std::to_string(frame) +
                                      " outside 1.." + std::to_string(frame_count));
    if (body < 1 || body > body_slots)
      fail(ErrorKind::structural, origin + ":" + std::to_string(line_no) +
                                      ": body index " + std::to_string(body) +
                                      " outside 1.." + std::to_string(body_slots));
    if (joint < 1 || joint > kJointsPerBody)
      fail(ErrorKind::structural, origin + ":" + std::to_string(line_no) +
                                      ": joint index outside 1..25");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      fail(ErrorKind::structural, origin + ":" + std::to_string(line_no) +
                                      ": non-finite coordinate");

    if (frame != cur_frame || body != cur_body) {
      // entering a new (frame, body) block; previous one must be complete
      if (cur_body != -1 && expected_joint != kJointsPerBody + 1)
        fail(ErrorKind::structural,
             origin + ": frame " + std::to_string(cur_frame) + " body " +
                 std::to_string(cur_body) + " has " +
                 std::to_string(expected_joint - 1) + " joints, expected 25");
      if (frame < cur_frame || (frame == cur_frame && cur_body != -1 && body < cur_body))
        parse_fail(origin, line_no, "lines not sorted by (frame, body)");
      cur_frame = frame;
      cur_body = body;
      expected_joint = 1;
      if (frames[std::size_t(frame - 1)].count(body))
        fail(ErrorKind::structural, origin + ": duplicate body block in frame " +
                                        std::to_string(frame));
    }
    if (joint != expected_joint)
      fail(ErrorKind::structural,
           origin + ": frame " + std::to_string(frame) + " body " +
               std::to_string(body) + ": joint " + std::to_string(expected_joint) +
               " expected, got " + std::to_string(joint));
    ++expected_joint;
    frames[std::size_t(frame - 1)][body].push_back(Joint3D{x, y, z});
  }
  if (cur_body != -1 && expected_joint != kJointsPerBody + 1)
    fail(ErrorKind::structural,
         origin + ": frame " + std::to_string(cur_frame) + " body " +
             std::to_string(cur_body) + " has " +
             std::to_string(expected_joint - 1) + " joints, expected 25");

  SkeletonSequence seq;
  seq.frames.reserve(std::size_t(frame_count));
  bool padded = false;
  for (int f = 0; f < frame_count; ++f) {
    const auto& bodies = frames[std::size_t(f)];
    if (bodies.empty())
      fail(ErrorKind::structural,
           origin + ": frame " + std::to_string(f + 1) + " has no bodies");
    SkeletonFrame fr;
    fr.timestamp_index = f;
    for (int b = 1; b <= body_slots; ++b) {
      BodyJoints joints{};  // zero body when the slot is absent
      auto it = bodies.find(b);
      if (it == bodies.end()) {
        padded = true;
      } else {
        std::copy(it->second.begin(), it->second.end(), joints.begin());
      }
      fr.bodies.push_back(joints);
    }
    seq.frames.push_back(std::move(fr));
  }
  seq.padded = padded;
  validate_sequence(seq, false);
  return seq;
}

SkeletonSequence parse_skeleton_file(const std::string& path) {
  return parse_skeleton_text(read_text_file(path), path);
}

std::string skeleton_to_text(const SkeletonSequence& seq) {
  validate_sequence(seq, false);
  const int body_slots = seq.body_count();
  std::string out = "FTHID-SKEL 1 " + std::to_string(seq.frames.size()) + " " +
                    std::to_string(body_slots) + "\n";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const SkeletonFrame& fr = seq.frames[f];
    for (int b = 0; b < body_slots; ++b) {
      // zero bodies are padding; they are omitted and re-padded on parse
      if (body_slots > 1 && body_is_zero(fr.bodies[std::size_t(b)])) continue;
      for (int j = 0; j < kJointsPerBody; ++j) {
        const Joint3D& p = fr.bodies[std::size_t(b)][std::size_t(j)];
        out += std::to_string(f + 1) + " " + std::to_string(b + 1) + " " +
               std::to_string(j + 1) + " " + format_double(p.x) + " " +
               format_double(p.y) + " " + format_double(p.z) + "\n";
      }
    }
  }
  return out;
}

void write_skeleton_file(const SkeletonSequence& seq, const std::string& path) {
  write_text_file(path, skeleton_to_text(seq));
}

// ------------------------------------------------------------- video blocks

namespace {

void put_i32(std::string& out, std::int32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((std::uint32_t(v) >> (8 * i)) & 0xff));
}

std::int32_t get_i32(const std::vector<unsigned char>& b, std::size_t& at,
                     const std::string& path) {
  if (at + 4 > b.size()) fail(ErrorKind::parse, path + ": truncated video block");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[at + i]) << (8 * i);
  at += 4;
  return std::int32_t(v);
}

}  // namespace

VideoSequence load_video(const std::string& path) {
  auto bytes = read_binary_file(path);
  std::size_t at = 0;
  const int F = get_i32(bytes, at, path);
  const int H = get_i32(bytes, at, path);
  const int W = get_i32(bytes, at, path);
  const int C = get_i32(bytes, at, path);
  if (F < 1 || H < 1 || W < 1 || (C != 1 && C != 3))
    fail(ErrorKind::structural, path + ": bad video dims");
  const std::size_t per_frame = std::size_t(H) * W * C;
  if (bytes.size() != at + sizeof(float) * per_frame * std::size_t(F))
    fail(ErrorKind::parse, path + ": payload size mismatch");
  VideoSequence v;
  v.height = H;
  v.width = W;
  v.channels = C;
  v.frames.resize(std::size_t(F));
  for (int f = 0; f < F; ++f) {
    v.frames[std::size_t(f)].resize(per_frame);
    std::memcpy(v.frames[std::size_t(f)].data(), bytes.data() + at,
                per_frame * sizeof(float));
    at += per_frame * sizeof(float);
    for (float x : v.frames[std::size_t(f)])
      if (!(x >= -1e-6f && x <= 1.0f + 1e-6f))
        fail(ErrorKind::structural, path + ": pixel outside [0,1]");
  }
  return v;
}

void save_video(const VideoSequence& video, const std::string& path) {
  if (video.frames.empty()) fail(ErrorKind::validation, "video has no frames");
  const std::size_t per_frame =
      std::size_t(video.height) * video.width * video.channels;
  std::string out;
  put_i32(out, std::int32_t(video.frames.size()));
  put_i32(out, video.height);
  put_i32(out, video.width);
  put_i32(out, video.channels);
  for (const auto& fr : video.frames) {
    if (fr.size() != per_frame)
      fail(ErrorKind::validation, "video frame size mismatch");
    const std::size_t off = out.size();
    out.resize(off + per_frame * sizeof(float));
    std::memcpy(out.data() + off, fr.data(), per_frame * sizeof(float));
  }
  write_binary_file(path, out.data(), out.size());
}

// ------------------------------------------------------------- manifest

std::string DatasetManifest::resolve_path(const ManifestEntry& e) const {
  fs::path p(e.path);
  if (p.is_absolute() || base_dir.empty()) return e.path;
  return (fs::path(base_dir) / p).string();
}

namespace {

void check_exact_keys(const json& obj, const std::vector<std::string>& keys,
                      const std::string& what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      fail(ErrorKind::parse, what + ": unknown key '" + it.key() + "'");
  }
  for (const auto& k : keys)
    if (!obj.contains(k))
      fail(ErrorKind::parse, what + ": missing key '" + k + "'");
}

void sort_entries(std::vector<ManifestEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              if (a.sample_id != b.sample_id) return a.sample_id < b.sample_id;
              if (a.view != b.view) return int(a.view) < int(b.view);
              return int(a.modality) < int(b.modality);
            });
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  if (!doc.is_array()) fail(ErrorKind::parse, path + ": manifest must be a JSON array");
  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  for (const auto& item : doc) {
    if (!item.is_object()) fail(ErrorKind::parse, path + ": entry must be an object");
    check_exact_keys(item,
                     {"sample_id", "class_id", "group_id", "view", "modality",
                      "path", "frame_count"},
                     path + " entry");
    ManifestEntry e;
    try {
      e.sample_id = item.at("sample_id").get<std::string>();
      e.class_id = item.at("class_id").get<int>();
      e.group_id = item.at("group_id").get<int>();
      e.view = parse_view(item.at("view").get<std::string>());
      e.modality = parse_modality(item.at("modality").get<std::string>());
      e.path = item.at("path").get<std::string>();
      e.frame_count = item.at("frame_count").get<int>();
    } catch (const json::exception& ex) {
      fail(ErrorKind::parse, path + ": bad entry: " + ex.what());
    }
    m.entries.push_back(std::move(e));
  }
  sort_entries(m.entries);
  validate_manifest(m, false);
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  DatasetManifest sorted = m;
  sort_entries(sorted.entries);
  json doc = json::array();
  for (const auto& e : sorted.entries) {
    doc.push_back(json{{"sample_id", e.sample_id},
                       {"class_id", e.class_id},
                       {"group_id", e.group_id},
                       {"view", view_name(e.view)},
                       {"modality", modality_name(e.modality)},
                       {"path", e.path},
                       {"frame_count", e.frame_count}});
  }
  write_text_file(path, doc.dump(1) + "\n");
}

void validate_manifest(const DatasetManifest& m, bool check_paths) {
  std::unordered_set<std::string> seen;
  for (const auto& e : m.entries) {
    if (e.sample_id.empty()) fail(ErrorKind::validation, "manifest: empty sample_id");
    if (e.class_id < 1 || e.class_id > kNumClasses)
      fail(ErrorKind::validation, "manifest: class_id " +
                                      std::to_string(e.class_id) +
                                      " outside [1,30] for " + e.sample_id);
    if (e.group_id < 1 || e.group_id > kNumGroups)
      fail(ErrorKind::validation, "manifest: group_id " +
                                      std::to_string(e.group_id) +
                                      " outside [1,89] for " + e.sample_id);
    if (e.frame_count < 1)
      fail(ErrorKind::validation, "manifest: frame_count < 1 for " + e.sample_id);
    const std::string key = e.sample_id + "@" + view_name(e.view) + "#" +
                            modality_name(e.modality);
    if (!seen.insert(key).second)
      fail(ErrorKind::validation,
           "manifest: duplicate sample " + key);
    if (check_paths && !fs::exists(m.resolve_path(e)))
      fail(ErrorKind::io, "manifest: missing file " + m.resolve_path(e));
  }
}

DatasetManifest filter_views(const DatasetManifest& m,
                             const std::set<View>& keep) {
  DatasetManifest out;
  out.base_dir = m.base_dir;
  for (const auto& e : m.entries)
    if (keep.count(e.view)) out.entries.push_back(e);
  return out;
}

SkeletonSequence load_skeleton_sample(const DatasetManifest& m,
                                      const ManifestEntry& e) {
  if (e.modality != Modality::skeleton)
    fail(ErrorKind::data, "entry " + e.sample_id + " is not a skeleton");
  SkeletonSequence seq = parse_skeleton_file(m.resolve_path(e));
  seq.view = e.view;
  seq.sample_id = e.sample_id;
  seq.class_id = e.class_id;
  seq.group_id = e.group_id;
  validate_sequence(seq, true);
  return seq;
}

VideoSequence load_video_sample(const DatasetManifest& m,
                                const ManifestEntry& e) {
  if (e.modality == Modality::skeleton)
    fail(ErrorKind::data, "entry " + e.sample_id + " is not a video");
  VideoSequence v = load_video(m.resolve_path(e));
  v.view = e.view;
  v.modality = e.modality;
  v.sample_id = e.sample_id;
  v.class_id = e.class_id;
  v.group_id = e.group_id;
  return v;
}

// ------------------------------------------------------------- splits

void save_split(const ProtocolSplit& s, const std::string& path) {
  json doc{{"protocol", protocol_name(s.protocol)},
           {"train_ids", s.train_ids},
           {"test_ids", s.test_ids}};
  write_text_file(path, doc.dump(1) + "\n");
}

ProtocolSplit load_split(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  check_exact_keys(doc, {"protocol", "train_ids", "test_ids"}, path);
  ProtocolSplit s;
  try {
    s.protocol = parse_protocol(doc.at("protocol").get<std::string>());
    s.train_ids = doc.at("train_ids").get<std::vector<std::string>>();
    s.test_ids = doc.at("test_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  return s;
}

TfPairing load_pairing(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("train") || !doc.contains("test"))
    fail(ErrorKind::parse, path + ": pairing needs 'train' and 'test' arrays");
  TfPairing p;
  try {
    p.train = doc.at("train").get<std::vector<std::string>>();
    p.test = doc.at("test").get<std::vector<std::string>>();
    if (doc.contains("note")) p.note = doc.at("note").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  return p;
}

void save_pairing(const TfPairing& p, const std::string& path) {
  json doc{{"train", p.train}, {"test", p.test}};
  if (!p.note.empty()) doc["note"] = p.note;
  write_text_file(path, doc.dump(1) + "\n");
}

namespace {

// unique (sample_id, view, class, group) tuples, sorted
struct ViewSample {
  std::string sample_id;
  View view;
  int group_id;
};

std::vector<ViewSample> view_samples(const DatasetManifest& m) {
  std::vector<ViewSample> out;
  std::unordered_set<std::string> seen;
  for (const auto& e : m.entries) {
    const std::string key = split_key(e.sample_id, e.view);
    if (seen.insert(key).second)
      out.push_back(ViewSample{e.sample_id, e.view, e.group_id});
  }
  std::sort(out.begin(), out.end(), [](const ViewSample& a, const ViewSample& b) {
    const std::string ka = split_key(a.sample_id, a.view);
    const std::string kb = split_key(b.sample_id, b.view);
    return ka < kb;
  });
  return out;
}

ProtocolSplit group_split(const DatasetManifest& m, Protocol proto,
                          bool (*is_test_group)(int)) {
  validate_manifest(m, false);
  ProtocolSplit s;
  s.protocol = proto;
  for (const auto& vs : view_samples(m)) {
    if (is_test_group(vs.group_id))
      s.test_ids.push_back(split_key(vs.sample_id, vs.view));
    else
      s.train_ids.push_back(split_key(vs.sample_id, vs.view));
  }
  if (s.train_ids.empty()) s.warnings.push_back("empty training set");
  if (s.test_ids.empty()) s.warnings.push_back("empty test set");
  return s;
}

}  // namespace

ProtocolSplit split_cs_first(const DatasetManifest& m) {
  return group_split(m, Protocol::cs_first, [](int g) { return g % 4 == 0; });
}

ProtocolSplit split_cs_second(const DatasetManifest& m) {
  return group_split(m, Protocol::cs_second, [](int g) { return g >= 46; });
}

ProtocolSplit split_cross_view(const DatasetManifest& m) {
  validate_manifest(m, false);
  for (const auto& e : m.entries)
    if (e.view == View::fpv)
      fail(ErrorKind::validation,
           "cross_view: manifest contains fpv entry " + e.sample_id);
  ProtocolSplit s;
  s.protocol = Protocol::cross_view;
  for (const auto& vs : view_samples(m)) {
    if (vs.view == View::front)
      s.test_ids.push_back(split_key(vs.sample_id, vs.view));
    else
      s.train_ids.push_back(split_key(vs.sample_id, vs.view));
  }
  if (s.train_ids.empty()) s.warnings.push_back("empty training set");
  if (s.test_ids.empty()) s.warnings.push_back("empty test set");
  return s;
}

ProtocolSplit split_tf_combined(const DatasetManifest& m, const TfPairing& p) {
  validate_manifest(m, false);
  std::unordered_set<std::string> assigned;
  for (const auto& id : p.train)
    if (!assigned.insert(id).second)
      fail(ErrorKind::pairing, "pairing: duplicate id " + id);
  for (const auto& id : p.test)
    if (!assigned.insert(id).second)
      fail(ErrorKind::pairing, "pairing: id " + id + " assigned twice");

  // every paired id must resolve in all four perspectives
  std::unordered_set<std::string> present;
  for (const auto& e : m.entries)
    present.insert(split_key(e.sample_id, e.view));
  const View all_views[] = {View::front, View::side, View::top, View::fpv};

  ProtocolSplit s;
  s.protocol = Protocol::tf_combined;
  auto emit = [&](const std::vector<std::string>& ids,
                  std::vector<std::string>& out) {
    for (const auto& id : ids) {
      for (View v : all_views) {
        const std::string key = split_key(id, v);
        if (!present.count(key))
          fail(ErrorKind::pairing,
               "pairing: sample " + id + " missing view " + view_name(v));
        out.push_back(key);
      }
    }
  };
  emit(p.train, s.train_ids);
  emit(p.test, s.test_ids);
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  if (s.train_ids.empty()) s.warnings.push_back("empty training set");
  if (s.test_ids.empty()) s.warnings.push_back("empty test set");
  return s;
}

ProtocolSplit run_protocol(Protocol p, const DatasetManifest& m,
                           const std::optional<TfPairing>& pairing) {
  switch (p) {
    case Protocol::cs_first: return split_cs_first(m);
    case Protocol::cs_second: return split_cs_second(m);
    case Protocol::cross_view: return split_cross_view(m);
    case Protocol::tf_combined:
      if (!pairing)
        fail(ErrorKind::validation, "tf_combined requires a pairing file");
      return split_tf_combined(m, *pairing);
  }
  fail(ErrorKind::validation, "unknown protocol");
}

// ------------------------------------------------------------- census

namespace {

std::string census_id(int group, int cls, int rep) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "g%03d_a%02d_r%d", group, cls, rep);
  return buf;
}

// deterministic event list truncated to the collection's third-person event
// count; ordered (repeat, class, group) so the shortfall spreads across
// groups and every group stays populated
std::vector<std::array<int, 3>> census_events() {
  std::vector<std::array<int, 3>> ev;
  ev.reserve(std::size_t(kNumGroups) * kNumClasses * 4);
  for (int r = 1; r <= 4; ++r)
    for (int c = 1; c <= kNumClasses; ++c)
      for (int g = 1; g <= kNumGroups; ++g) ev.push_back({g, c, r});
  ev.resize(kCensusTpvEvents);
  return ev;
}

}  // namespace

DatasetManifest census_manifest() {
  DatasetManifest m;
  const auto events = census_events();
  auto add = [&](const std::array<int, 3>& e, View v, Modality mo) {
    ManifestEntry entry;
    entry.sample_id = census_id(e[0], e[1], e[2]);
    entry.group_id = e[0];
    entry.class_id = e[1];
    entry.view = v;
    entry.modality = mo;
    entry.path = std::string(view_name(v)) + "/" + modality_name(mo) + "/" +
                 entry.sample_id + (mo == Modality::skeleton ? ".skel" : ".vbin");
    entry.frame_count = 1;
    m.entries.push_back(std::move(entry));
  };
  for (const auto& e : events) {
    for (View v : {View::front, View::side, View::top}) {
      add(e, v, Modality::rgb);
      add(e, v, Modality::depth);
    }
    // skeleton streams exist for the two horizontal views only
    add(e, View::front, Modality::skeleton);
    add(e, View::side, Modality::skeleton);
  }
  for (int i = 0; i < kCensusFpvEvents; ++i) {
    add(events[std::size_t(i)], View::fpv, Modality::rgb);
    add(events[std::size_t(i)], View::fpv, Modality::depth);
  }
  sort_entries(m.entries);
  return m;
}

TfPairing census_default_pairing() {
  const auto events = census_events();
  std::vector<std::string> ids;
  ids.reserve(kCensusPairedEvents);
  for (int i = 0; i < kCensusPairedEvents; ++i)
    ids.push_back(census_id(events[std::size_t(i)][0], events[std::size_t(i)][1],
                            events[std::size_t(i)][2]));
  // the collection reports pair counts but not the assignment; this
  // deterministic shuffle is the shipped default
  Rng rng(20210ull);
  for (std::size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[std::size_t(rng.below(i))]);
  TfPairing p;
  p.note =
      "default train/test assignment of the paired samples; the assignment "
      "itself is a toolkit default, only the counts follow the collection";
  p.train.assign(ids.begin(), ids.begin() + kCensusPairedTrain);
  p.test.assign(ids.begin() + kCensusPairedTrain, ids.end());
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.test.begin(), p.test.end());
  return p;
}

}  // namespace mvact::data
