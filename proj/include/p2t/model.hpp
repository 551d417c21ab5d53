#pragma once

#include <random>
#include <string>
#include <vector>

#include "p2t/data.hpp"
#include "p2t/tensor.hpp"
#include "p2t/time2vec.hpp"

namespace p2t::model {

using ad::Tensor;

struct ModelConfig {
  data::Family family = data::Family::F1;
  std::size_t d_model = 128;
  std::size_t n_heads = 8;
  std::size_t n_encoder_layers = 2;
  std::size_t n_decoder_layers = 1;  // each with three sub-layers
  std::size_t ffn_dim = 256;
  std::size_t k_time = 15;
  double dropout = 0.1;
  bool use_decoder_mask = true;  // on for F3/F4, off for F1/F2
  std::size_t lstm_hidden = 128;
  std::size_t enc_len_frames = 30;
  std::size_t horizon_frames = 30;
  double fps = 60.0;
  std::uint64_t seed = 1;

  std::size_t enc_input_width() const {
    return data::feature_dim(family) + k_time + 1;
  }
  std::size_t dec_input_width() const { return 2 + k_time + 1; }
  void validate() const;
};

// Applies the family's mask convention (F3/F4 masked, F1/F2 not).
ModelConfig default_config_for(data::Family family);

struct AttentionParams {
  Tensor wq, wk, wv, wo;  // d_model x d_model
  Tensor bq, bk, bv, bo;  // d_model
};

struct FfnParams {
  Tensor w1, b1, w2, b2;
};

struct NormParams {
  Tensor gain, bias;
};

struct EncoderLayerParams {
  AttentionParams attn;
  NormParams norm1;
  FfnParams ffn;
  NormParams norm2;
};

struct DecoderLayerParams {
  AttentionParams self_attn;
  NormParams norm1;
  AttentionParams cross_attn;
  NormParams norm2;
  FfnParams ffn;
  NormParams norm3;
};

struct LstmParams {
  Tensor wx;  // d_model x 4*hidden, gate order i,f,g,o
  Tensor wh;  // hidden x 4*hidden
  Tensor b;   // 4*hidden, forget block initialized to 1
};

struct ModelParams {
  Time2VecParams t2v_enc;
  Time2VecParams t2v_dec;
  Tensor input_proj_enc_w, input_proj_enc_b;
  Tensor input_proj_dec_w, input_proj_dec_b;
  std::vector<EncoderLayerParams> encoder;
  std::vector<DecoderLayerParams> decoder;
  LstmParams lstm;
  Tensor output_proj_w, output_proj_b;

  // Canonical (name, tensor) enumeration; the checkpoint directory order.
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::vector<Tensor> all() const;
  std::size_t parameter_count() const;
};

// Xavier-uniform weights, zero biases, unit norm gains, forget-gate bias 1;
// fully determined by config.seed.
ModelParams init_params(const ModelConfig& config);

// (i,j) permitted iff j <= i; forbidden entries are -1e9 added pre-softmax,
// which underflows to exactly zero attention weight.
Tensor causal_mask(std::size_t L);

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const Tensor* mask, const AttentionParams& params,
                            std::size_t n_heads);

Tensor encoder_forward(const Tensor& enc_in, const ModelParams& params,
                       const ModelConfig& config, bool training,
                       std::mt19937_64& rng);

Tensor decoder_forward(const Tensor& dec_in, const Tensor& memory,
                       const ModelParams& params, const ModelConfig& config,
                       bool training, std::mt19937_64& rng);

Tensor smooth_and_project(const Tensor& hidden, const ModelParams& params,
                          const ModelConfig& config);

// Full pass: time2vec + attach on both streams, encoder, decoder, recurrent
// smoothing, 2D projection. Output is dec_len x 2 in normalized coordinates.
Tensor model_forward(const data::TrainingExample& example,
                     const ModelParams& params, const ModelConfig& config,
                     bool training, std::mt19937_64& rng);

// Same pass with caller-supplied decoder inputs (autoregressive inference).
Tensor model_forward_raw(const std::vector<double>& enc_in,
                         const std::vector<double>& enc_times,
                         std::size_t enc_len,
                         const std::vector<double>& dec_in,
                         const std::vector<double>& dec_times,
                         std::size_t dec_len, const ModelParams& params,
                         const ModelConfig& config, bool training,
                         std::mt19937_64& rng);

}  // namespace p2t::model
