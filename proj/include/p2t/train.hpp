#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "p2t/adam.hpp"
#include "p2t/data.hpp"
#include "p2t/model.hpp"

namespace p2t::train {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 1e-4;             // not stated in the source method; our default
  double weight_decay = 1e-4;   // likewise
  double beta1 = ad::kAdamBeta1;
  double beta2 = ad::kAdamBeta2;
  double eps = ad::kAdamEps;
  std::uint64_t shuffle_seed = 1;
  double validation_fraction = 0.1;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;  // NaN when no validation split
};

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  model::ModelConfig model_config;
  TrainConfig train_config;
  model::ModelParams params;
  std::optional<ad::AdamState> adam_state;
  std::size_t epoch = 0;
  std::vector<EpochMetrics> metrics_log;
};

// Teacher-forcing training: decoder inputs are ground truth throughout, MSE
// over all dec_len x 2 outputs, per-epoch shuffling, gradient clipping at
// global norm 1. Validation examples are split off before training starts.
Checkpoint train(const std::vector<data::TrainingExample>& examples,
                 const model::ModelConfig& model_config,
                 const TrainConfig& train_config);

// Container: "P2TJ" magic, u32 version, u64 header length, JSON header
// (configs, tensor directory with name/shape/offset), then little-endian
// float64 payloads. save -> load -> save is byte-identical.
void save_checkpoint(const Checkpoint& c, std::ostream& sink);
Checkpoint load_checkpoint(std::istream& source);
void save_checkpoint_file(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

struct Prediction {
  std::vector<double> points;  // (horizon+1) x 2, normalized coordinates
  std::size_t len = 0;
  bool horizon_exceeds_trained = false;
};

// Autoregressive inference over the teacher-forcing window layout: decoder
// slots at times <= t come from history, future slots are filled from the
// model's own outputs (exact in one fill pass under the causal mask, iterated
// re-decoding without it).
Prediction predict_trajectory(const Checkpoint& checkpoint,
                              const data::FeatureSeries& history,
                              std::size_t horizon);

void write_metrics_csv(std::ostream& out,
                       const std::vector<EpochMetrics>& metrics);

// Config (de)serialization shared by checkpoints, the CLI and report headers.
nlohmann::json model_config_to_json(const model::ModelConfig& c);
model::ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace p2t::train
