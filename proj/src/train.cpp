#include "p2t/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace p2t::train {

using ad::Tensor;

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw InvalidConfig("validation_fraction must be in [0,1)");
  if (lr < 0.0 || weight_decay < 0.0)
    throw InvalidConfig("lr and weight_decay must be non-negative");
}

namespace {

Tensor example_loss(const data::TrainingExample& ex,
                    const model::ModelParams& params,
                    const model::ModelConfig& config, bool training,
                    std::mt19937_64& rng) {
  Tensor pred = model::model_forward(ex, params, config, training, rng);
  Tensor target =
      Tensor::from({ex.dec_len, 2}, std::vector<double>(ex.target));
  return ad::mean(ad::square(ad::sub(pred, target)));
}

double eval_mse(const std::vector<data::TrainingExample>& examples,
                const std::vector<std::size_t>& idx,
                const model::ModelParams& params,
                const model::ModelConfig& config) {
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(0);  // unused in eval mode
  double sum = 0.0;
  for (std::size_t i : idx)
    sum += example_loss(examples[i], params, config, false, rng).item();
  return sum / static_cast<double>(idx.size());
}

}  // namespace

Checkpoint train(const std::vector<data::TrainingExample>& examples,
                 const model::ModelConfig& model_config,
                 const TrainConfig& train_config) {
  model_config.validate();
  train_config.validate();
  if (examples.empty()) throw EmptyDataset("train: no examples");
  for (const auto& ex : examples)
    if (ex.feat_dim != data::feature_dim(model_config.family) ||
        ex.dec_len != model_config.horizon_frames + 1)
      throw ShapeMismatch("train: example dims inconsistent with config");

  Checkpoint ckpt;
  ckpt.model_config = model_config;
  ckpt.train_config = train_config;
  ckpt.params = model::init_params(model_config);
  std::vector<Tensor> param_list = ckpt.params.all();
  ad::AdamState state;

  // validation split held out up front
  std::mt19937_64 split_rng(train_config.shuffle_seed);
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), split_rng);
  const auto val_n = static_cast<std::size_t>(
      train_config.validation_fraction * static_cast<double>(examples.size()));
  std::vector<std::size_t> val_idx(idx.begin(), idx.begin() + val_n);
  std::vector<std::size_t> train_idx(idx.begin() + val_n, idx.end());
  if (train_idx.empty()) throw EmptyDataset("train: no examples after split");

  std::mt19937_64 epoch_rng(train_config.shuffle_seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 dropout_rng(train_config.shuffle_seed ^
                              0xc2b2ae3d27d4eb4fULL);

  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), epoch_rng);
    double epoch_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += train_config.batch_size, ++batch_no) {
      const std::size_t end =
          std::min(start + train_config.batch_size, train_idx.size());
      Tensor batch_loss;
      for (std::size_t i = start; i < end; ++i) {
        Tensor l = example_loss(examples[train_idx[i]], ckpt.params,
                                model_config, true, dropout_rng);
        batch_loss = i == start ? l : ad::add(batch_loss, l);
      }
      batch_loss =
          ad::scale(batch_loss, 1.0 / static_cast<double>(end - start));
      const double lv = batch_loss.item();
      if (!std::isfinite(lv) || lv > 1e12)
        throw DivergedLoss("diverged loss in epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no));
      epoch_sum += lv * static_cast<double>(end - start);
      ad::backward(batch_loss);
      ad::clip_grad_norm(param_list, 1.0);
      ad::adam_step(param_list, state, train_config.lr, train_config.beta1,
                    train_config.beta2, train_config.eps,
                    train_config.weight_decay);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_mse = epoch_sum / static_cast<double>(train_idx.size());
    m.val_mse = eval_mse(examples, val_idx, ckpt.params, model_config);
    ckpt.metrics_log.push_back(m);
    ckpt.epoch = epoch;
  }
  ckpt.adam_state = std::move(state);
  return ckpt;
}

Prediction predict_trajectory(const Checkpoint& checkpoint,
                              const data::FeatureSeries& history,
                              std::size_t horizon) {
  const auto& cfg = checkpoint.model_config;
  const std::size_t enc_len = cfg.enc_len_frames;
  if (history.length < enc_len)
    throw HistoryTooShort("need " + std::to_string(enc_len) +
                          " frames of history, got " +
                          std::to_string(history.length));
  if (history.family != cfg.family)
    throw ShapeMismatch("history family does not match checkpoint");
  if (horizon < 1) throw InvalidParams("horizon must be >= 1");

  Prediction result;
  result.horizon_exceeds_trained = horizon > cfg.horizon_frames;
  const std::size_t dim = history.feature_dim;
  const std::size_t tail = history.length - enc_len;  // 0-based start of tail
  std::vector<double> enc_in(history.matrix.begin() + tail * dim,
                             history.matrix.end());
  const double fps = history.frames_per_second;
  std::vector<double> enc_times(enc_len);
  for (std::size_t i = 0; i < enc_len; ++i)
    enc_times[i] = static_cast<double>(i) / fps;

  const std::size_t half_up = (horizon + 1) / 2;  // ceil(h/2)
  const std::size_t dec_len = horizon + 1;
  // decoder slot i holds the centroid at time offset i - half_up from the
  // window end; slots with offset <= 0 come from history
  const std::size_t cx = 0;  // target player 1 centroid columns
  std::vector<double> dec_in(dec_len * 2, 0.0);
  std::vector<double> dec_times(dec_len);
  std::vector<bool> known(dec_len, false);
  const double last_x = history.matrix[(history.length - 1) * dim + cx];
  const double last_y = history.matrix[(history.length - 1) * dim + cx + 1];
  // recent velocity seeds the unknown slots; a plain last-value hold leaves
  // them far from the truth and the decoder reproduces that error
  const std::size_t lookback = std::min<std::size_t>(5, history.length - 1);
  double vel_x = 0.0, vel_y = 0.0;
  if (lookback > 0) {
    const std::size_t past = history.length - 1 - lookback;
    vel_x = (last_x - history.matrix[past * dim + cx]) /
            static_cast<double>(lookback);
    vel_y = (last_y - history.matrix[past * dim + cx + 1]) /
            static_cast<double>(lookback);
  }
  for (std::size_t i = 0; i < dec_len; ++i) {
    const auto offset = static_cast<std::ptrdiff_t>(i) -
                        static_cast<std::ptrdiff_t>(half_up);
    dec_times[i] = static_cast<double>(static_cast<std::ptrdiff_t>(enc_len) -
                                       1 + offset) /
                   fps;
    if (offset <= 0) {
      const std::size_t src = history.length - 1 + offset;
      if (src >= history.length)  // window reaches before available history
        throw HistoryTooShort("decoder window reaches before history start");
      dec_in[i * 2] = history.matrix[src * dim + cx];
      dec_in[i * 2 + 1] = history.matrix[src * dim + cx + 1];
      known[i] = true;
    } else {
      // unknown future slot; overwritten from model output row `offset`
      dec_in[i * 2] = last_x + vel_x * static_cast<double>(offset);
      dec_in[i * 2 + 1] = last_y + vel_y * static_cast<double>(offset);
    }
  }
  const std::size_t unknown =
      dec_len > half_up + 1 ? dec_len - half_up - 1 : 0;
  // Under the causal mask one fill pass is exact: output row j only sees
  // slots <= j, all of which are known, so a second pass finalizes the
  // remaining rows. Without the mask re-decoding feeds the model its own
  // outputs in positions where it was trained on ground truth, which
  // amplifies error instead of refining it, so decode once from the
  // extrapolated slots.
  const std::size_t passes = unknown == 0 ? 1 : (cfg.use_decoder_mask ? 2 : 1);
  std::mt19937_64 rng(0);
  std::vector<double> out;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    Tensor pred = model::model_forward_raw(
        enc_in, enc_times, enc_len, dec_in, dec_times, dec_len,
        checkpoint.params, cfg, false, rng);
    out = pred.data();
    for (std::size_t i = 0; i < dec_len; ++i) {
      if (known[i]) continue;
      const std::size_t j =
          i - half_up;  // output row predicting this slot's time
      dec_in[i * 2] = out[j * 2];
      dec_in[i * 2 + 1] = out[j * 2 + 1];
    }
  }
  result.points = std::move(out);
  result.len = dec_len;
  return result;
}

void write_metrics_csv(std::ostream& out,
                       const std::vector<EpochMetrics>& metrics) {
  auto fmt = [](double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
  };
  out << "epoch,train_mse,val_mse\n";
  for (const auto& m : metrics)
    out << m.epoch << ',' << fmt(m.train_mse) << ',' << fmt(m.val_mse) << '\n';
}

}  // namespace p2t::train
