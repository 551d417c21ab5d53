#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "p2t/errors.hpp"

namespace p2t::data {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr std::size_t kNumJoints = 17;  // COCO keypoint order

// One video frame's structured observation.
struct FrameRecord {
  std::int64_t frame_index = 0;
  double timestamp_ms = 0.0;
  Point p1_centroid;
  std::array<Point, kNumJoints> p1_joints{};
  Point p2_centroid;
  std::array<Point, kNumJoints> p2_joints{};
  std::optional<Point> ball;
  bool interpolated = false;  // set by fill_ball_gaps, in-memory only

  bool ball_visible() const { return ball.has_value(); }
};

struct SeriesMeta {
  double width_px = 1280.0;
  double height_px = 720.0;
  double fps = 60.0;
};

enum class Format { csv, jsonl };

enum class Family { F1 = 1, F2 = 2, F3 = 3, F4 = 4 };

std::size_t feature_dim(Family f);        // 4 / 72 / 72 / 74
bool family_uses_mask(Family f);          // true for F3, F4
Family family_from_string(const std::string& s);
std::string to_string(Family f);

// T x feature_dim matrix of [0,1]-normalized coordinates. Column layout:
// [C1.x, C1.y, J1 interleaved x,y x17, C2.x, C2.y, J2 x17, B.x, B.y] with
// absent blocks removed per family.
struct FeatureSeries {
  Family family = Family::F1;
  double frames_per_second = 60.0;
  std::size_t feature_dim = 4;
  std::size_t length = 0;
  std::vector<double> matrix;  // row-major, length * feature_dim
  double width_px = 1280.0;
  double height_px = 720.0;

  const double* row(std::size_t t) const { return matrix.data() + t * feature_dim; }
};

// One teacher-forcing instance. With encoder window ending at 1-based time t:
// enc covers [t-enc_len+1 .. t], dec_in [t-ceil(h/2) .. t+floor(h/2)],
// target [t .. t+h]; dec_in and target take the target player's centroid.
struct TrainingExample {
  std::size_t enc_len = 0;
  std::size_t feat_dim = 0;
  std::vector<double> enc_in;     // enc_len * feat_dim
  std::vector<double> enc_times;  // seconds from window start
  std::size_t dec_len = 0;        // horizon + 1
  std::vector<double> dec_in;     // dec_len * 2
  std::vector<double> dec_times;
  std::vector<double> target;     // dec_len * 2
  int target_player = 1;
};

struct SynthParams {
  std::size_t n_frames = 20000;
  double fps = 60.0;
  std::uint64_t seed = 1;
  double pursuit_gain = 0.12;        // per-frame fraction toward the landing point
  double joint_jitter_px = 2.0;
  double ball_speed_px_per_frame = 14.0;
  double occlusion_gap_prob = 0.0;   // per exchange
  double frame_w = 1280.0;
  double frame_h = 720.0;
};

// --- parsing / serialization -------------------------------------------

struct ParsedRecords {
  std::vector<FrameRecord> records;
  SeriesMeta meta;
};

ParsedRecords parse_frame_records(std::istream& in, Format format);
void write_frame_records(std::ostream& out, const std::vector<FrameRecord>& records,
                         const SeriesMeta& meta, Format format);
Format format_from_path(const std::string& path);

// --- pipeline operations ------------------------------------------------

// Least-squares polynomial fit over `context` visible frames on each side of
// every gap, x(frame) and y(frame) independently.
std::vector<FrameRecord> fill_ball_gaps(const std::vector<FrameRecord>& records,
                                        std::size_t context = 10,
                                        std::size_t degree = 2);

FeatureSeries build_feature_series(const std::vector<FrameRecord>& records,
                                   Family family, const SeriesMeta& meta);

// round(ms*fps/1000), minimum 1
std::size_t ms_to_frames(double ms, double fps);

std::vector<TrainingExample> make_windows(const FeatureSeries& series,
                                          std::size_t enc_len,
                                          std::size_t horizon,
                                          int target_player = 1,
                                          std::size_t stride = 1);

std::vector<FrameRecord> synth_rally(const SynthParams& params);

}  // namespace p2t::data
