#include "p2t/eval.hpp"

#include <cmath>

namespace p2t::eval {

double mede(const std::vector<double>& truth, const std::vector<double>& pred) {
  if (truth.size() != pred.size())
    throw LengthMismatch("mede: sequence lengths differ");
  if (truth.empty() || truth.size() % 2 != 0)
    throw EmptySequence("mede: need at least one (x,y) pair");
  const std::size_t T = truth.size() / 2;
  double sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double dx = truth[t * 2] - pred[t * 2];
    const double dy = truth[t * 2 + 1] - pred[t * 2 + 1];
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(T);
}

std::vector<double> persistence_baseline(double last_x, double last_y,
                                         std::size_t horizon) {
  if (horizon < 1) throw InvalidParams("persistence: horizon must be >= 1");
  std::vector<double> out;
  out.reserve((horizon + 1) * 2);
  for (std::size_t i = 0; i <= horizon; ++i) {
    out.push_back(last_x);
    out.push_back(last_y);
  }
  return out;
}

std::string to_string(Mode m) {
  return m == Mode::teacher_forced ? "teacher_forced" : "autoregressive";
}

Mode mode_from_string(const std::string& s) {
  if (s == "teacher_forced") return Mode::teacher_forced;
  if (s == "autoregressive") return Mode::autoregressive;
  throw InvalidParams("unknown evaluation mode '" + s + "'");
}

namespace {

// pixel-space truth/pred for the window ending at 1-based time t
struct WindowEval {
  std::vector<double> truth_px;
  std::vector<double> pred_px;
};

WindowEval eval_window(const train::Checkpoint& ckpt,
                       const data::FeatureSeries& series, std::size_t t,
                       std::size_t horizon, Mode mode, int target_player,
                       const data::TrainingExample* teacher_example) {
  const auto& cfg = ckpt.model_config;
  const std::size_t dim = series.feature_dim;
  const std::size_t cx =
      target_player == 1 ? 0 : (series.family == data::Family::F1 ? 2 : 36);
  WindowEval out;
  std::vector<double> pred_norm;
  if (mode == Mode::autoregressive) {
    // history = the series truncated at t
    data::FeatureSeries hist;
    hist.family = series.family;
    hist.frames_per_second = series.frames_per_second;
    hist.feature_dim = dim;
    hist.length = t;  // full prefix; known decoder slots may reach back
    hist.width_px = series.width_px;
    hist.height_px = series.height_px;
    hist.matrix.assign(series.matrix.begin(),
                       series.matrix.begin() + t * dim);
    pred_norm = train::predict_trajectory(ckpt, hist, horizon).points;
  } else {
    std::mt19937_64 rng(0);
    pred_norm =
        model::model_forward(*teacher_example, ckpt.params, cfg, false, rng)
            .data();
  }
  const std::size_t L = horizon + 1;
  out.pred_px.resize(L * 2);
  out.truth_px.resize(L * 2);
  for (std::size_t i = 0; i < L; ++i) {
    out.pred_px[i * 2] = pred_norm[i * 2] * series.width_px;
    out.pred_px[i * 2 + 1] = pred_norm[i * 2 + 1] * series.height_px;
    const std::size_t tgt = t + i;  // 1-based
    out.truth_px[i * 2] = series.matrix[(tgt - 1) * dim + cx] * series.width_px;
    out.truth_px[i * 2 + 1] =
        series.matrix[(tgt - 1) * dim + cx + 1] * series.height_px;
  }
  return out;
}

}  // namespace

GridOutput evaluate_grid(const std::vector<train::Checkpoint>& checkpoints,
                         const std::vector<data::FrameRecord>& records,
                         const data::SeriesMeta& meta,
                         const std::vector<double>& horizons_ms, Mode mode,
                         int target_player) {
  if (checkpoints.empty()) throw MissingCheckpoint("no checkpoints given");
  GridOutput out;
  for (const auto& ckpt : checkpoints) {
    const auto& cfg = ckpt.model_config;
    const auto series =
        data::build_feature_series(records, cfg.family, meta);
    const double train_len_ms =
        static_cast<double>(cfg.enc_len_frames) * 1000.0 / cfg.fps;
    for (const double h_ms : horizons_ms) {
      const std::size_t h = data::ms_to_frames(h_ms, meta.fps);
      const std::size_t half_up = (h + 1) / 2;
      const std::size_t t_first = std::max(cfg.enc_len_frames, half_up + 1);
      if (series.length < t_first + h)
        throw SeriesTooShort("series too short for horizon " +
                             std::to_string(h_ms) + " ms");
      EvalResult cell;
      cell.family = cfg.family;
      cell.train_len_ms = train_len_ms;
      cell.horizon_ms = h_ms;
      cell.mode = mode;
      std::vector<data::TrainingExample> teacher_windows;
      if (mode == Mode::teacher_forced)
        teacher_windows = data::make_windows(series, cfg.enc_len_frames, h,
                                             target_player, h);
      double sum = 0.0;
      bool first = true;
      std::size_t wi = 0;
      for (std::size_t t = t_first; t + h <= series.length; t += h, ++wi) {
        const auto w = eval_window(
            ckpt, series, t, h, mode, target_player,
            mode == Mode::teacher_forced ? &teacher_windows.at(wi) : nullptr);
        sum += mede(w.truth_px, w.pred_px);
        ++cell.n_windows;
        if (first) {
          Trace tr;
          tr.family = cfg.family;
          tr.train_len_ms = train_len_ms;
          tr.horizon_ms = h_ms;
          tr.truth = w.truth_px;
          tr.pred = w.pred_px;
          out.traces.push_back(std::move(tr));
          first = false;
        }
      }
      cell.mede_px = sum / static_cast<double>(cell.n_windows);
      out.results.push_back(cell);
    }
  }
  return out;
}

}  // namespace p2t::eval
