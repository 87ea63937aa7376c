#include <filesystem>
#include <set>

#include "doctest.h"
#include "mvact/common.hpp"
#include "mvact/data_model.hpp"

using namespace mvact::data;
using mvact::Error;
using mvact::ErrorKind;
using mvact::Rng;

namespace fs = std::filesystem;

namespace {

std::string two_frame_one_body() {
  std::string s = "FTHID-SKEL 1 2 1\n";
  for (int f = 1; f <= 2; ++f)
    for (int j = 1; j <= 25; ++j)
      s += std::to_string(f) + " 1 " + std::to_string(j) + " 0.1 0.2 0.3\n";
  return s;
}

SkeletonSequence random_sequence(Rng& rng, int frames, int bodies) {
  SkeletonSequence seq;
  for (int f = 0; f < frames; ++f) {
    SkeletonFrame fr;
    fr.timestamp_index = f;
    for (int b = 0; b < bodies; ++b) {
      BodyJoints joints;
      for (auto& j : joints) {
        j.x = rng.uniform(-1, 1);
        j.y = rng.uniform(0, 2);
        j.z = rng.uniform(-1, 1);
      }
      fr.bodies.push_back(joints);
    }
    seq.frames.push_back(fr);
  }
  return seq;
}

ManifestEntry entry(const std::string& id, int cls, int grp, View v, Modality m) {
  ManifestEntry e;
  e.sample_id = id;
  e.class_id = cls;
  e.group_id = grp;
  e.view = v;
  e.modality = m;
  e.path = id + ".skel";
  e.frame_count = 10;
  return e;
}

}  // namespace

TEST_CASE("skeleton parse: well-formed two-frame one-body file") {
  auto seq = parse_skeleton_text(two_frame_one_body(), "mem");
  CHECK(seq.frames.size() == 2);
  CHECK(seq.body_count() == 1);
  CHECK_FALSE(seq.padded);
  CHECK(seq.frames[1].bodies[0][24].z == doctest::Approx(0.3));
}

TEST_CASE("skeleton parse: 24-joint frame is a structural error naming frame 2") {
  std::string s = "FTHID-SKEL 1 2 1\n";
  for (int j = 1; j <= 25; ++j) s += "1 1 " + std::to_string(j) + " 0 0 0\n";
  for (int j = 1; j <= 24; ++j) s += "2 1 " + std::to_string(j) + " 0 0 0\n";
  try {
    parse_skeleton_text(s, "mem");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::structural);
    CHECK(std::string(e.what()).find("frame 2") != std::string::npos);
  }
}

TEST_CASE("skeleton parse: alternating bodies padded to two with flag") {
  std::string s = "FTHID-SKEL 1 3 2\n";
  auto block = [&](int f, int b, double v) {
    for (int j = 1; j <= 25; ++j)
      s += std::to_string(f) + " " + std::to_string(b) + " " +
           std::to_string(j) + " " + std::to_string(v) + " 1 1\n";
  };
  block(1, 1, 0.5);
  block(2, 1, 0.5);
  block(2, 2, 0.7);
  block(3, 1, 0.5);
  auto seq = parse_skeleton_text(s, "mem");
  CHECK(seq.body_count() == 2);
  CHECK(seq.padded);
  // frames 1 and 3 got zero second bodies
  for (int f : {0, 2})
    for (const auto& j : seq.frames[std::size_t(f)].bodies[1]) {
      CHECK(j.x == 0.0);
      CHECK(j.y == 0.0);
    }
  CHECK(seq.frames[1].bodies[1][0].x == doctest::Approx(0.7));
}

TEST_CASE("skeleton parse: malformed line reports line number") {
  std::string s = "FTHID-SKEL 1 1 1\n1 1 1 0 0 banana\n";
  try {
    parse_skeleton_text(s, "mem");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("mem:2") != std::string::npos);
  }
}

TEST_CASE("skeleton round trip: parse(write(x)) == x") {
  Rng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int frames = 2 + int(rng.below(6));
    const int bodies = 1 + int(rng.below(2));
    SkeletonSequence seq = random_sequence(rng, frames, bodies);
    if (bodies == 2 && trial % 3 == 0) {
      // zero out a body to exercise the padding path
      seq.frames[0].bodies[1] = BodyJoints{};
      seq.padded = true;
    }
    auto back = parse_skeleton_text(skeleton_to_text(seq), "mem");
    REQUIRE(back.frames.size() == seq.frames.size());
    CHECK(back.padded == seq.padded);
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      REQUIRE(back.frames[f].bodies.size() == seq.frames[f].bodies.size());
      for (std::size_t b = 0; b < seq.frames[f].bodies.size(); ++b)
        for (int j = 0; j < kJointsPerBody; ++j) {
          CHECK(back.frames[f].bodies[b][std::size_t(j)].x ==
                seq.frames[f].bodies[b][std::size_t(j)].x);
          CHECK(back.frames[f].bodies[b][std::size_t(j)].y ==
                seq.frames[f].bodies[b][std::size_t(j)].y);
          CHECK(back.frames[f].bodies[b][std::size_t(j)].z ==
                seq.frames[f].bodies[b][std::size_t(j)].z);
        }
    }
  }
}

TEST_CASE("cs splits") {
  DatasetManifest m;
  for (int g = 1; g <= 89; ++g)
    m.entries.push_back(entry("s" + std::to_string(g), 1, g, View::front,
                              Modality::skeleton));

  SUBCASE("first formulation tests multiples of 4") {
    auto s = split_cs_first(m);
    CHECK(s.test_ids.size() == 22);
    CHECK(s.train_ids.size() == 67);
    std::set<int> test_groups;
    for (const auto& id : s.test_ids) {
      const int g = std::stoi(id.substr(1, id.find('@') - 1));
      test_groups.insert(g);
    }
    std::set<int> expect;
    for (int g = 4; g <= 88; g += 4) expect.insert(g);
    CHECK(test_groups == expect);
  }

  SUBCASE("second formulation splits at group 46") {
    auto s = split_cs_second(m);
    CHECK(s.train_ids.size() == 45);
    CHECK(s.test_ids.size() == 44);
    CHECK(s.in_train("s45@front"));
    CHECK(s.in_test("s46@front"));
  }

  SUBCASE("degenerate manifests warn") {
    DatasetManifest only1;
    only1.entries.push_back(entry("a", 1, 1, View::front, Modality::skeleton));
    auto s1 = split_cs_first(only1);
    CHECK(s1.test_ids.empty());
    CHECK_FALSE(s1.warnings.empty());

    DatasetManifest only4;
    only4.entries.push_back(entry("b", 1, 4, View::front, Modality::skeleton));
    auto s4 = split_cs_first(only4);
    CHECK(s4.train_ids.empty());
    CHECK_FALSE(s4.warnings.empty());
  }

  SUBCASE("no group straddles a cs split") {
    Rng rng(7);
    DatasetManifest rm;
    for (int i = 0; i < 200; ++i) {
      const int g = 1 + int(rng.below(89));
      rm.entries.push_back(entry("r" + std::to_string(i), 1 + int(rng.below(30)),
                                 g, i % 2 ? View::front : View::side,
                                 Modality::skeleton));
    }
    for (auto split : {split_cs_first(rm), split_cs_second(rm)}) {
      std::set<int> train_groups, test_groups;
      for (const auto& e : rm.entries) {
        const std::string key = split_key(e.sample_id, e.view);
        if (split.in_train(key)) train_groups.insert(e.group_id);
        if (split.in_test(key)) test_groups.insert(e.group_id);
        CHECK(split.in_train(key) != split.in_test(key));
      }
      for (int g : train_groups) CHECK(test_groups.count(g) == 0);
    }
  }

  SUBCASE("out-of-range group is a validation error") {
    DatasetManifest bad;
    bad.entries.push_back(entry("x", 1, 90, View::front, Modality::skeleton));
    CHECK_THROWS_AS(split_cs_first(bad), Error);
  }
}

TEST_CASE("cross-view split") {
  SUBCASE("one sample per view") {
    DatasetManifest m;
    m.entries.push_back(entry("a", 1, 1, View::front, Modality::rgb));
    m.entries.push_back(entry("a", 1, 1, View::side, Modality::rgb));
    m.entries.push_back(entry("a", 1, 1, View::top, Modality::rgb));
    auto s = split_cross_view(m);
    CHECK(s.train_ids.size() == 2);
    CHECK(s.test_ids.size() == 1);
    CHECK(s.in_test("a@front"));
  }
  SUBCASE("front-only manifest warns") {
    DatasetManifest m;
    m.entries.push_back(entry("a", 1, 1, View::front, Modality::rgb));
    auto s = split_cross_view(m);
    CHECK(s.train_ids.empty());
    CHECK_FALSE(s.warnings.empty());
  }
  SUBCASE("fpv rejected") {
    DatasetManifest m;
    m.entries.push_back(entry("a", 1, 1, View::fpv, Modality::rgb));
    CHECK_THROWS_AS(split_cross_view(m), Error);
  }
}

TEST_CASE("tf combined split") {
  DatasetManifest m;
  for (const char* id : {"p1", "p2", "p3", "p4"})
    for (View v : {View::front, View::side, View::top, View::fpv})
      m.entries.push_back(entry(id, 1, 1, v, Modality::rgb));

  SUBCASE("declared assignment applies per view") {
    TfPairing p;
    p.train = {"p1", "p2", "p3"};
    p.test = {"p4"};
    auto s = split_tf_combined(m, p);
    CHECK(s.train_ids.size() == 12);
    CHECK(s.test_ids.size() == 4);
    for (View v : {View::front, View::side, View::top, View::fpv})
      CHECK(s.in_test(split_key("p4", v)));
  }

  SUBCASE("missing fpv view is a pairing error naming the id") {
    DatasetManifest partial = m;
    partial.entries.erase(
        std::remove_if(partial.entries.begin(), partial.entries.end(),
                       [](const ManifestEntry& e) {
                         return e.sample_id == "p2" && e.view == View::fpv;
                       }),
        partial.entries.end());
    TfPairing p;
    p.train = {"p1", "p2"};
    p.test = {"p3"};
    try {
      split_tf_combined(partial, p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::pairing);
      CHECK(std::string(e.what()).find("p2") != std::string::npos);
    }
  }

  SUBCASE("double assignment rejected") {
    TfPairing p;
    p.train = {"p1"};
    p.test = {"p1"};
    CHECK_THROWS_AS(split_tf_combined(m, p), Error);
  }
}

TEST_CASE("census replica reproduces the protocol arithmetic") {
  const DatasetManifest census = census_manifest();

  SUBCASE("cross-view counts") {
    auto tpv = filter_views(census, {View::front, View::side, View::top});
    auto s = split_cross_view(tpv);
    CHECK(s.train_ids.size() == 19764);
    CHECK(s.test_ids.size() == 9882);
  }

  SUBCASE("tf pairing counts per view") {
    auto pairing = census_default_pairing();
    CHECK(pairing.train.size() == 5528);
    CHECK(pairing.test.size() == 2886);
    auto s = split_tf_combined(census, pairing);
    CHECK(s.train_ids.size() == 4 * 5528);
    CHECK(s.test_ids.size() == 4 * 2886);
    std::size_t front_train = 0;
    for (const auto& id : s.train_ids)
      if (id.find("@front") != std::string::npos) ++front_train;
    CHECK(front_train == 5528);
  }

  SUBCASE("cs_first census test groups") {
    auto s = split_cs_first(census);
    std::set<int> test_groups;
    for (const auto& id : s.test_ids)
      test_groups.insert(std::stoi(id.substr(1, 3)));
    std::set<int> expect;
    for (int g = 4; g <= 88; g += 4) expect.insert(g);
    CHECK(test_groups == expect);
  }
}

TEST_CASE("manifest json round trip and strictness") {
  const std::string dir = "dm_test_out";
  fs::create_directories(dir);
  DatasetManifest m;
  m.entries.push_back(entry("a1", 2, 3, View::front, Modality::skeleton));
  m.entries.push_back(entry("a1", 2, 3, View::side, Modality::skeleton));
  save_manifest(m, dir + "/manifest.json");
  auto loaded = load_manifest(dir + "/manifest.json");
  REQUIRE(loaded.entries.size() == 2);
  CHECK(loaded.entries[0].sample_id == "a1");
  CHECK(loaded.entries[0].class_id == 2);

  SUBCASE("unknown keys rejected") {
    mvact::write_text_file(dir + "/bad.json",
                           R"([{"sample_id":"x","class_id":1,"group_id":1,)"
                           R"("view":"front","modality":"rgb","path":"p",)"
                           R"("frame_count":1,"extra":true}])");
    CHECK_THROWS_AS(load_manifest(dir + "/bad.json"), Error);
  }
  SUBCASE("duplicates rejected") {
    DatasetManifest dup;
    dup.entries.push_back(entry("a", 1, 1, View::front, Modality::rgb));
    dup.entries.push_back(entry("a", 1, 1, View::front, Modality::rgb));
    CHECK_THROWS_AS(validate_manifest(dup, false), Error);
  }
}

TEST_CASE("split json round trip") {
  ProtocolSplit s;
  s.protocol = Protocol::cross_view;
  s.train_ids = {"a@side", "a@top"};
  s.test_ids = {"a@front"};
  const std::string path = "dm_test_out/split.json";
  fs::create_directories("dm_test_out");
  save_split(s, path);
  auto back = load_split(path);
  CHECK(back.protocol == Protocol::cross_view);
  CHECK(back.train_ids == s.train_ids);
  CHECK(back.test_ids == s.test_ids);
}

TEST_CASE("video block round trip") {
  VideoSequence v;
  v.height = 4;
  v.width = 3;
  v.channels = 1;
  Rng rng(5);
  for (int f = 0; f < 3; ++f) {
    std::vector<float> fr(12);
    for (auto& x : fr) x = float(rng.uniform());
    v.frames.push_back(fr);
  }
  fs::create_directories("dm_test_out");
  save_video(v, "dm_test_out/v.vbin");
  auto back = load_video("dm_test_out/v.vbin");
  CHECK(back.height == 4);
  CHECK(back.frames.size() == 3);
  CHECK(back.frames[2] == v.frames[2]);
}
