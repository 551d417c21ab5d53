#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "p2t/data.hpp"

using namespace p2t;
using namespace p2t::data;

namespace {

std::vector<FrameRecord> sample_records(std::size_t n, bool with_ball = true) {
  std::vector<FrameRecord> recs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = recs[i];
    r.frame_index = static_cast<std::int64_t>(i);
    r.timestamp_ms = static_cast<double>(i) * 1000.0 / 60.0;
    r.p1_centroid = {100.0 + 0.5 * i, 200.0 + 0.25 * i};
    r.p2_centroid = {900.0 - 0.5 * i, 300.0};
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      r.p1_joints[j] = {r.p1_centroid.x + j, r.p1_centroid.y - j};
      r.p2_joints[j] = {r.p2_centroid.x - j, r.p2_centroid.y + j};
    }
    if (with_ball && i % 7 != 3)
      r.ball = Point{640.0 + std::sin(0.1 * i) * 100.0, 360.0};
  }
  return recs;
}

std::string dump(const std::vector<FrameRecord>& recs, const SeriesMeta& meta,
                 Format f) {
  std::ostringstream os;
  write_frame_records(os, recs, meta, f);
  return os.str();
}

}  // namespace

TEST_CASE("csv round trip is byte exact") {
  SeriesMeta meta{1280, 720, 60};
  auto recs = sample_records(25);
  const std::string first = dump(recs, meta, Format::csv);
  std::istringstream is(first);
  auto parsed = parse_frame_records(is, Format::csv);
  CHECK(parsed.records.size() == recs.size());
  CHECK(parsed.meta.fps == 60.0);
  CHECK(parsed.meta.width_px == 1280.0);
  CHECK(dump(parsed.records, parsed.meta, Format::csv) == first);
}

TEST_CASE("jsonl round trip is byte exact") {
  SeriesMeta meta{1920, 1080, 50};
  auto recs = sample_records(12);
  const std::string first = dump(recs, meta, Format::jsonl);
  std::istringstream is(first);
  auto parsed = parse_frame_records(is, Format::jsonl);
  CHECK(parsed.records.size() == recs.size());
  CHECK(dump(parsed.records, parsed.meta, Format::jsonl) == first);
}

TEST_CASE("csv and jsonl parses agree on content") {
  SeriesMeta meta{1280, 720, 60};
  auto recs = sample_records(10);
  std::istringstream ic(dump(recs, meta, Format::csv));
  std::istringstream ij(dump(recs, meta, Format::jsonl));
  auto pc = parse_frame_records(ic, Format::csv);
  auto pj = parse_frame_records(ij, Format::jsonl);
  REQUIRE(pc.records.size() == pj.records.size());
  for (std::size_t i = 0; i < pc.records.size(); ++i) {
    CHECK(pc.records[i].p1_centroid.x == pj.records[i].p1_centroid.x);
    CHECK(pc.records[i].ball.has_value() == pj.records[i].ball.has_value());
    if (pc.records[i].ball)
      CHECK(pc.records[i].ball->y == pj.records[i].ball->y);
  }
}

TEST_CASE("non-monotone frame indices are rejected") {
  SeriesMeta meta;
  auto recs = sample_records(5);
  recs[3].frame_index = 1;
  std::istringstream is(dump(recs, meta, Format::csv));
  CHECK_THROWS_AS(parse_frame_records(is, Format::csv), NonMonotoneFrames);
}

TEST_CASE("format is inferred from the path extension") {
  CHECK(format_from_path("a/b/match.csv") == Format::csv);
  CHECK(format_from_path("match.jsonl") == Format::jsonl);
  CHECK_THROWS_AS(format_from_path("match.xml"), InputError);
}

TEST_CASE("gap fill recovers an exact parabola") {
  auto recs = sample_records(140, false);
  auto truth = [](double t) {
    return Point{0.01 * t * t + 3.0 * t + 7.0, -0.02 * t * t + 5.0 * t + 40.0};
  };
  for (std::size_t i = 0; i < recs.size(); ++i)
    recs[i].ball = truth(static_cast<double>(i));
  for (std::size_t i = 20; i < 120; ++i) recs[i].ball.reset();  // 100-frame gap
  auto filled = fill_ball_gaps(recs, 10, 2);
  for (std::size_t i = 20; i < 120; ++i) {
    REQUIRE(filled[i].ball.has_value());
    CHECK(filled[i].interpolated);
    auto want = truth(static_cast<double>(i));
    CHECK(std::abs(filled[i].ball->x - want.x) < 1e-9);
    CHECK(std::abs(filled[i].ball->y - want.y) < 1e-9);
  }
  CHECK_FALSE(filled[5].interpolated);
}

TEST_CASE("gap fill stays close under measurement noise") {
  auto truth = [](double t) {
    return Point{0.005 * t * t + 2.0 * t + 50.0, -0.008 * t * t + 4.0 * t + 90.0};
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto recs = sample_records(100, false);
    for (std::size_t i = 0; i < recs.size(); ++i)
      recs[i].ball = Point{truth(static_cast<double>(i)).x + noise(rng),
                           truth(static_cast<double>(i)).y + noise(rng)};
    for (std::size_t i = 30; i < 70; ++i) recs[i].ball.reset();
    auto filled = fill_ball_gaps(recs, 10, 2);
    for (std::size_t i = 30; i < 70; ++i) {
      auto want = truth(static_cast<double>(i));
      CHECK(std::abs(filled[i].ball->x - want.x) < 5.0);
      CHECK(std::abs(filled[i].ball->y - want.y) < 5.0);
    }
  }
}

TEST_CASE("gap fill without enough flank context is an error") {
  auto recs = sample_records(30, false);
  for (std::size_t i = 0; i < recs.size(); ++i)
    recs[i].ball = Point{1.0 * i, 2.0 * i};
  for (std::size_t i = 0; i < 5; ++i) recs[i].ball.reset();  // gap at start
  CHECK_THROWS_AS(fill_ball_gaps(recs, 10, 2), InsufficientContext);
}

TEST_CASE("feature dimensions per family") {
  CHECK(feature_dim(Family::F1) == 4);
  CHECK(feature_dim(Family::F2) == 72);
  CHECK(feature_dim(Family::F3) == 72);
  CHECK(feature_dim(Family::F4) == 74);
  CHECK_FALSE(family_uses_mask(Family::F1));
  CHECK_FALSE(family_uses_mask(Family::F2));
  CHECK(family_uses_mask(Family::F3));
  CHECK(family_uses_mask(Family::F4));
  CHECK(family_from_string("F2") == Family::F2);
  CHECK(to_string(Family::F4) == "F4");
  CHECK_THROWS_AS(family_from_string("F9"), InputError);
}

TEST_CASE("feature series normalizes to the frame size") {
  SeriesMeta meta{1000, 500, 60};
  auto recs = sample_records(8);
  auto s1 = build_feature_series(recs, Family::F1, meta);
  CHECK(s1.feature_dim == 4);
  CHECK(s1.length == 8);
  CHECK(s1.row(0)[0] == doctest::Approx(100.0 / 1000.0).epsilon(1e-12));
  CHECK(s1.row(0)[1] == doctest::Approx(200.0 / 500.0).epsilon(1e-12));
  CHECK(s1.row(0)[2] == doctest::Approx(900.0 / 1000.0).epsilon(1e-12));
  for (std::size_t t = 0; t < s1.length; ++t)
    for (std::size_t c = 0; c < s1.feature_dim; ++c) {
      CHECK(s1.row(t)[c] >= 0.0);
      CHECK(s1.row(t)[c] <= 1.0);
    }
  auto s2 = build_feature_series(recs, Family::F2, meta);
  CHECK(s2.feature_dim == 72);
  // joints follow the centroid columns for each player
  CHECK(s2.row(0)[2] == doctest::Approx((100.0 + 0.0) / 1000.0).epsilon(1e-12));
}

TEST_CASE("ball family requires a visible or filled ball everywhere") {
  SeriesMeta meta;
  auto recs = sample_records(8);  // frame 3 has no ball
  CHECK_THROWS_AS(build_feature_series(recs, Family::F4, meta), MissingBall);
  auto filled = fill_ball_gaps(sample_records(30), 3, 1);
  auto s4 = build_feature_series(filled, Family::F4, meta);
  CHECK(s4.feature_dim == 74);
}

TEST_CASE("millisecond to frame conversion") {
  CHECK(ms_to_frames(500, 60) == 30);
  CHECK(ms_to_frames(1000, 60) == 60);
  CHECK(ms_to_frames(50, 60) == 3);
  CHECK(ms_to_frames(100, 60) == 6);
  CHECK(ms_to_frames(1, 60) == 1);  // clamped to at least one frame
  CHECK(ms_to_frames(250, 60) == 15);
}

TEST_CASE("window slicing matches the index oracle") {
  // row t encodes its own index so slices can be identified
  FeatureSeries s;
  s.family = Family::F1;
  s.feature_dim = 4;
  s.length = 100;
  s.frames_per_second = 60.0;
  s.matrix.resize(s.length * 4);
  for (std::size_t t = 0; t < s.length; ++t)
    for (std::size_t c = 0; c < 4; ++c)
      s.matrix[t * 4 + c] = static_cast<double>(t) + 1000.0 * c;

  auto wins = make_windows(s, 30, 6, 1, 1);
  // first window ends at row 29 (frame 30 of 1..100): encoder rows 0..29,
  // decoder input rows 26..32, target rows 29..35
  REQUIRE_FALSE(wins.empty());
  const auto& w = wins.front();
  CHECK(w.enc_len == 30);
  CHECK(w.feat_dim == 4);
  CHECK(w.dec_len == 7);
  CHECK(w.enc_in[0] == 0.0);
  CHECK(w.enc_in[29 * 4] == 29.0);
  CHECK(w.dec_in[0] == 26.0);          // centroid x at row 26
  CHECK(w.dec_in[1] == 26.0 + 1000.0); // centroid y column
  CHECK(w.dec_in[6 * 2] == 32.0);
  CHECK(w.target[0] == 29.0);
  CHECK(w.target[6 * 2] == 35.0);
  CHECK(w.enc_times[0] == 0.0);
  CHECK(w.enc_times[29] == doctest::Approx(29.0 / 60.0).epsilon(1e-12));
  CHECK(w.dec_times[0] == doctest::Approx(26.0 / 60.0).epsilon(1e-12));
  // count law: window ends t = 30..94 (1-based), targets reach t+6 <= 100
  CHECK(wins.size() == 65);

  auto wins2 = make_windows(s, 30, 6, 2, 1);
  CHECK(wins2.front().dec_in[0] == 26.0 + 2000.0);  // player 2 centroid column

  auto strided = make_windows(s, 30, 6, 1, 7);
  CHECK(strided.size() == (65 + 6) / 7);
  CHECK(strided[1].enc_in[0] == 7.0);
}

TEST_CASE("short series yields no windows or an error") {
  FeatureSeries s;
  s.family = Family::F1;
  s.feature_dim = 4;
  s.length = 10;
  s.matrix.assign(40, 0.0);
  CHECK_THROWS_AS(make_windows(s, 30, 6), SeriesTooShort);
}

TEST_CASE("synthetic rally is deterministic and in bounds") {
  SynthParams p;
  p.n_frames = 600;
  p.seed = 42;
  auto a = synth_rally(p);
  auto b = synth_rally(p);
  REQUIRE(a.size() == 600);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frame_index == static_cast<std::int64_t>(i));
    CHECK(a[i].p1_centroid.x == b[i].p1_centroid.x);
    CHECK(a[i].p2_centroid.y == b[i].p2_centroid.y);
    CHECK(a[i].ball.has_value() == b[i].ball.has_value());
    CHECK(a[i].p1_centroid.x >= 0.0);
    CHECK(a[i].p1_centroid.x <= p.frame_w);
    CHECK(a[i].p1_centroid.y >= 0.0);
    CHECK(a[i].p1_centroid.y <= p.frame_h);
  }
  p.seed = 43;
  auto c = synth_rally(p);
  bool differs = false;
  for (std::size_t i = 0; i < a.size() && !differs; ++i)
    differs = a[i].p1_centroid.x != c[i].p1_centroid.x;
  CHECK(differs);
}

TEST_CASE("synthetic occlusions produce ball gaps, otherwise full coverage") {
  SynthParams p;
  p.n_frames = 2000;
  p.seed = 7;
  p.occlusion_gap_prob = 0.0;
  auto clean = synth_rally(p);
  for (const auto& r : clean) CHECK(r.ball_visible());
  p.occlusion_gap_prob = 1.0;
  auto gappy = synth_rally(p);
  std::size_t missing = 0;
  for (const auto& r : gappy) missing += r.ball_visible() ? 0 : 1;
  CHECK(missing > 0);
  // gaps must be fillable with the default pipeline settings
  auto filled = fill_ball_gaps(gappy, 10, 2);
  for (const auto& r : filled) CHECK(r.ball_visible());
}
