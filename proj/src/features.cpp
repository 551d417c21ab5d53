#include <algorithm>
#include <cmath>

#include "p2t/data.hpp"

namespace p2t::data {

std::size_t feature_dim(Family f) {
  switch (f) {
    case Family::F1: return 4;
    case Family::F2:
    case Family::F3: return 72;
    case Family::F4: return 74;
  }
  throw InvalidConfig("bad family");
}

bool family_uses_mask(Family f) {
  return f == Family::F3 || f == Family::F4;
}

Family family_from_string(const std::string& s) {
  if (s == "F1" || s == "1") return Family::F1;
  if (s == "F2" || s == "2") return Family::F2;
  if (s == "F3" || s == "3") return Family::F3;
  if (s == "F4" || s == "4") return Family::F4;
  throw InvalidConfig("unknown model family '" + s + "'");
}

std::string to_string(Family f) {
  return "F" + std::to_string(static_cast<int>(f));
}

namespace {

double norm_coord(double v, double extent, const char* what) {
  if (!std::isfinite(v)) throw MissingJoint(std::string("non-finite ") + what);
  return std::clamp(v / extent, 0.0, 1.0);
}

}  // namespace

FeatureSeries build_feature_series(const std::vector<FrameRecord>& records,
                                   Family family, const SeriesMeta& meta) {
  FeatureSeries s;
  s.family = family;
  s.frames_per_second = meta.fps;
  s.feature_dim = feature_dim(family);
  s.length = records.size();
  s.width_px = meta.width_px;
  s.height_px = meta.height_px;
  s.matrix.reserve(s.length * s.feature_dim);
  const bool joints = family != Family::F1;
  const bool ball = family == Family::F4;
  for (const auto& r : records) {
    auto push = [&](const Point& p, const char* what) {
      s.matrix.push_back(norm_coord(p.x, meta.width_px, what));
      s.matrix.push_back(norm_coord(p.y, meta.height_px, what));
    };
    push(r.p1_centroid, "p1 centroid");
    if (joints)
      for (const auto& j : r.p1_joints) push(j, "p1 joint");
    push(r.p2_centroid, "p2 centroid");
    if (joints)
      for (const auto& j : r.p2_joints) push(j, "p2 joint");
    if (ball) {
      if (!r.ball_visible())
        throw MissingBall("family F4 requires a visible ball at frame " +
                          std::to_string(r.frame_index) +
                          " (run gap-fill first)");
      push(*r.ball, "ball");
    }
  }
  return s;
}

std::size_t ms_to_frames(double ms, double fps) {
  const auto f = static_cast<std::size_t>(std::llround(ms * fps / 1000.0));
  return std::max<std::size_t>(1, f);
}

std::vector<TrainingExample> make_windows(const FeatureSeries& series,
                                          std::size_t enc_len,
                                          std::size_t horizon,
                                          int target_player,
                                          std::size_t stride) {
  if (enc_len < 1 || horizon < 1 || stride < 1)
    throw InvalidParams("make_windows: enc_len, horizon, stride must be >= 1");
  if (target_player != 1 && target_player != 2)
    throw InvalidParams("target_player must be 1 or 2");
  const std::size_t N = series.length;
  const std::size_t half_up = (horizon + 1) / 2;  // ceil(h/2)
  if (N < enc_len + horizon)
    throw SeriesTooShort("series length " + std::to_string(N) +
                         " < enc_len + horizon = " +
                         std::to_string(enc_len + horizon));
  const std::size_t dim = series.feature_dim;
  // target player's centroid columns in the family layout
  const std::size_t cx =
      target_player == 1 ? 0 : (series.family == Family::F1 ? 2 : 36);
  const double fps = series.frames_per_second;
  std::vector<TrainingExample> out;
  // 1-based window-end time t; dec_in start t-ceil(h/2) must be >= 1
  const std::size_t t_first = std::max(enc_len, half_up + 1);
  for (std::size_t t = t_first; t + horizon <= N; t += stride) {
    TrainingExample ex;
    ex.enc_len = enc_len;
    ex.feat_dim = dim;
    ex.dec_len = horizon + 1;
    ex.target_player = target_player;
    const std::size_t enc_start = t - enc_len + 1;  // 1-based
    ex.enc_in.assign(series.matrix.begin() + (enc_start - 1) * dim,
                     series.matrix.begin() + t * dim);
    ex.enc_times.resize(enc_len);
    for (std::size_t i = 0; i < enc_len; ++i)
      ex.enc_times[i] = static_cast<double>(i) / fps;
    const std::size_t dec_start = t - half_up;  // 1-based
    ex.dec_in.resize(ex.dec_len * 2);
    ex.dec_times.resize(ex.dec_len);
    ex.target.resize(ex.dec_len * 2);
    for (std::size_t i = 0; i < ex.dec_len; ++i) {
      const std::size_t idx = dec_start + i;  // 1-based frame position
      ex.dec_in[i * 2] = series.matrix[(idx - 1) * dim + cx];
      ex.dec_in[i * 2 + 1] = series.matrix[(idx - 1) * dim + cx + 1];
      ex.dec_times[i] =
          static_cast<double>(idx - enc_start) / fps;
      const std::size_t tgt = t + i;  // 1-based
      ex.target[i * 2] = series.matrix[(tgt - 1) * dim + cx];
      ex.target[i * 2 + 1] = series.matrix[(tgt - 1) * dim + cx + 1];
    }
    out.push_back(std::move(ex));
  }
  if (out.empty())
    throw SeriesTooShort("no complete window fits the series");
  return out;
}

}  // namespace p2t::data
