#pragma once

#include <string>
#include <vector>

#include "p2t/data.hpp"
#include "p2t/train.hpp"

namespace p2t::eval {

// (1/T) * sum_t sqrt((x_t - xhat_t)^2 + (y_t - yhat_t)^2); inputs are T x 2.
double mede(const std::vector<double>& truth, const std::vector<double>& pred);

// Repeats the last observed centroid at every step; (horizon+1) x 2.
std::vector<double> persistence_baseline(double last_x, double last_y,
                                         std::size_t horizon);

enum class Mode { teacher_forced, autoregressive };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct EvalResult {
  data::Family family = data::Family::F1;
  double train_len_ms = 0.0;
  double horizon_ms = 0.0;
  double mede_px = 0.0;
  std::size_t n_windows = 0;
  Mode mode = Mode::autoregressive;
};

// Predicted-vs-truth series (pixels) for one evaluation window, for
// offline X/Y trace plotting.
struct Trace {
  data::Family family = data::Family::F1;
  double train_len_ms = 0.0;
  double horizon_ms = 0.0;
  std::vector<double> truth;  // L x 2
  std::vector<double> pred;   // L x 2
};

struct GridOutput {
  std::vector<EvalResult> results;
  std::vector<Trace> traces;  // first window of each cell
};

inline const std::vector<double> kTableHorizonsMs = {50,  100, 150, 200,
                                                     250, 500, 1000};

// One cell per checkpoint x horizon. Evaluation windows are cut with stride =
// horizon frames (non-overlapping targets); errors are denormalized per axis
// to pixels via the series scale.
GridOutput evaluate_grid(const std::vector<train::Checkpoint>& checkpoints,
                         const std::vector<data::FrameRecord>& records,
                         const data::SeriesMeta& meta,
                         const std::vector<double>& horizons_ms, Mode mode,
                         int target_player = 1);

enum class ReportFormat { csv, json, md };
ReportFormat report_format_from_string(const std::string& s);

// Deterministic column order: family, train_ms, horizon_ms, mede_px,
// n_windows, mode. The md format renders a matrix with one horizon column
// per grid horizon. `header_note` is echoed as a comment header.
std::string emit_report(const std::vector<EvalResult>& results,
                        ReportFormat format, const std::string& header_note);

std::vector<EvalResult> parse_report(const std::string& text,
                                     ReportFormat format);

std::string emit_trace_csv(const Trace& t);

}  // namespace p2t::eval
