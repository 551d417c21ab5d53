#include <cmath>
#include <numbers>
#include <random>

#include "p2t/data.hpp"

namespace p2t::data {

namespace {

// COCO order: nose, eyes, ears, shoulders, elbows, wrists, hips, knees, ankles.
// Offsets in pixels from the centroid, y grows downward.
constexpr Point kJointOffsets[kNumJoints] = {
    {0, -55},  {-4, -58}, {4, -58},  {-8, -56}, {8, -56},  {-16, -38},
    {16, -38}, {-22, -16}, {22, -16}, {-25, 4},  {25, 4},   {-10, 8},
    {10, 8},   {-12, 38}, {12, 38},  {-13, 66}, {13, 66}};

struct PlayerState {
  Point pos;
  Point home;
  double gait_phase = 0.0;
};

}  // namespace

std::vector<FrameRecord> synth_rally(const SynthParams& p) {
  if (p.n_frames < 1 || p.fps <= 0 || p.pursuit_gain < 0 ||
      p.pursuit_gain > 1 || p.joint_jitter_px < 0 ||
      p.ball_speed_px_per_frame <= 0 || p.occlusion_gap_prob < 0 ||
      p.occlusion_gap_prob > 1 || p.frame_w <= 0 || p.frame_h <= 0)
    throw InvalidParams("synth_rally: parameter out of range");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> jitter(0.0, p.joint_jitter_px);
  std::normal_distribution<double> drift(0.0, 0.25 * p.joint_jitter_px);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  const double w = p.frame_w, h = p.frame_h;
  PlayerState players[2] = {
      {{w * 0.5, h * 0.82}, {w * 0.5, h * 0.82}, 0.0},   // near player
      {{w * 0.5, h * 0.22}, {w * 0.5, h * 0.22}, 0.25}};  // far player
  int hitter = 0;
  Point ball_from = players[0].pos;

  std::vector<FrameRecord> out;
  out.reserve(p.n_frames);
  std::size_t frame = 0;
  while (frame < p.n_frames) {
    const int receiver = 1 - hitter;
    // landing point inside the receiver's half
    std::uniform_real_distribution<double> lx(0.2 * w, 0.8 * w);
    std::uniform_real_distribution<double> ly(
        receiver == 1 ? 0.15 * h : 0.70 * h,
        receiver == 1 ? 0.30 * h : 0.88 * h);
    const Point landing{lx(rng), ly(rng)};
    const double dist = std::hypot(landing.x - ball_from.x,
                                   landing.y - ball_from.y);
    const std::size_t flight = std::max<std::size_t>(
        10, static_cast<std::size_t>(
                std::llround(dist / p.ball_speed_px_per_frame)));
    const double arc = 0.18 * dist;
    // contiguous invisible run mid-flight, flanks stay visible for gap-fill
    std::size_t hide_begin = flight, hide_end = flight;
    if (flight >= 26 && coin(rng) < p.occlusion_gap_prob) {
      hide_begin = 12;
      hide_end = flight - 12;
    }
    for (std::size_t f = 0; f < flight && frame < p.n_frames; ++f, ++frame) {
      const double s = static_cast<double>(f) / static_cast<double>(flight);
      Point ball{ball_from.x + s * (landing.x - ball_from.x),
                 ball_from.y + s * (landing.y - ball_from.y) -
                     arc * 4.0 * s * (1.0 - s)};
      for (int i = 0; i < 2; ++i) {
        const Point goal = (i == receiver)
                               ? landing
                               : Point{players[i].home.x, players[i].home.y};
        const double g =
            (i == receiver) ? p.pursuit_gain : 0.5 * p.pursuit_gain;
        const double dx = g * (goal.x - players[i].pos.x) + drift(rng);
        const double dy = g * (goal.y - players[i].pos.y) + drift(rng);
        players[i].pos.x += dx;
        players[i].pos.y += dy;
        players[i].gait_phase += 0.02 + 0.01 * std::hypot(dx, dy);
      }
      FrameRecord r;
      r.frame_index = static_cast<std::int64_t>(frame);
      r.timestamp_ms = static_cast<double>(frame) * 1000.0 / p.fps;
      auto fill_player = [&](const PlayerState& ps, Point& centroid,
                             std::array<Point, kNumJoints>& joints) {
        centroid = ps.pos;
        for (std::size_t j = 0; j < kNumJoints; ++j) {
          const double gait =
              3.0 * std::sin(2.0 * std::numbers::pi * ps.gait_phase +
                             static_cast<double>(j) * 0.7);
          joints[j] = Point{ps.pos.x + kJointOffsets[j].x + gait + jitter(rng),
                            ps.pos.y + kJointOffsets[j].y +
                                0.5 * gait + jitter(rng)};
        }
      };
      fill_player(players[0], r.p1_centroid, r.p1_joints);
      fill_player(players[1], r.p2_centroid, r.p2_joints);
      if (f < hide_begin || f >= hide_end) r.ball = ball;
      out.push_back(std::move(r));
    }
    ball_from = landing;
    hitter = receiver;
  }
  return out;
}

}  // namespace p2t::data
