#include "p2t/model.hpp"

#include <cmath>

namespace p2t::model {

namespace ad = p2t::ad;

void ModelConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || ffn_dim == 0 || lstm_hidden == 0 ||
      k_time < 1 || enc_len_frames == 0 || horizon_frames == 0 ||
      n_encoder_layers == 0 || n_decoder_layers == 0)
    throw InvalidConfig("model dimensions must be positive");
  if (d_model % n_heads != 0)
    throw InvalidConfig("d_model must be divisible by n_heads");
  if (dropout < 0.0 || dropout >= 1.0)
    throw InvalidConfig("dropout must be in [0,1)");
}

ModelConfig default_config_for(data::Family family) {
  ModelConfig c;
  c.family = family;
  c.use_decoder_mask = data::family_uses_mask(family);
  return c;
}

namespace {

Tensor xavier(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  std::vector<double> d(fan_in * fan_out);
  for (auto& v : d) v = u(rng);
  return Tensor::from({fan_in, fan_out}, std::move(d), true);
}

Tensor zeros_vec(std::size_t n) {
  return Tensor::from({n}, std::vector<double>(n, 0.0), true);
}

Tensor ones_vec(std::size_t n) {
  return Tensor::from({n}, std::vector<double>(n, 1.0), true);
}

AttentionParams init_attention(std::size_t d, std::mt19937_64& rng) {
  AttentionParams a;
  a.wq = xavier(d, d, rng);
  a.wk = xavier(d, d, rng);
  a.wv = xavier(d, d, rng);
  a.wo = xavier(d, d, rng);
  a.bq = zeros_vec(d);
  a.bk = zeros_vec(d);
  a.bv = zeros_vec(d);
  a.bo = zeros_vec(d);
  return a;
}

FfnParams init_ffn(std::size_t d, std::size_t ffn, std::mt19937_64& rng) {
  FfnParams f;
  f.w1 = xavier(d, ffn, rng);
  f.b1 = zeros_vec(ffn);
  f.w2 = xavier(ffn, d, rng);
  f.b2 = zeros_vec(d);
  return f;
}

NormParams init_norm(std::size_t d) {
  return {ones_vec(d), zeros_vec(d)};
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return ad::add_rowwise(ad::matmul(x, w), b);
}

}  // namespace

ModelParams init_params(const ModelConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t d = config.d_model;
  ModelParams p;
  p.t2v_enc = init_time2vec(config.k_time, config.fps,
                            static_cast<double>(config.enc_len_frames), rng);
  p.t2v_dec = init_time2vec(config.k_time, config.fps,
                            static_cast<double>(config.enc_len_frames), rng);
  p.input_proj_enc_w = xavier(config.enc_input_width(), d, rng);
  p.input_proj_enc_b = zeros_vec(d);
  p.input_proj_dec_w = xavier(config.dec_input_width(), d, rng);
  p.input_proj_dec_b = zeros_vec(d);
  for (std::size_t i = 0; i < config.n_encoder_layers; ++i) {
    EncoderLayerParams l;
    l.attn = init_attention(d, rng);
    l.norm1 = init_norm(d);
    l.ffn = init_ffn(d, config.ffn_dim, rng);
    l.norm2 = init_norm(d);
    p.encoder.push_back(std::move(l));
  }
  for (std::size_t i = 0; i < config.n_decoder_layers; ++i) {
    DecoderLayerParams l;
    l.self_attn = init_attention(d, rng);
    l.norm1 = init_norm(d);
    l.cross_attn = init_attention(d, rng);
    l.norm2 = init_norm(d);
    l.ffn = init_ffn(d, config.ffn_dim, rng);
    l.norm3 = init_norm(d);
    p.decoder.push_back(std::move(l));
  }
  const std::size_t hid = config.lstm_hidden;
  p.lstm.wx = xavier(d, 4 * hid, rng);
  p.lstm.wh = xavier(hid, 4 * hid, rng);
  {
    std::vector<double> b(4 * hid, 0.0);
    for (std::size_t i = hid; i < 2 * hid; ++i) b[i] = 1.0;  // forget gate
    p.lstm.b = Tensor::from({4 * hid}, std::move(b), true);
  }
  p.output_proj_w = xavier(hid, 2, rng);
  p.output_proj_b = zeros_vec(2);
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("t2v_enc.omega", t2v_enc.omega);
  out.emplace_back("t2v_enc.phi", t2v_enc.phi);
  out.emplace_back("t2v_dec.omega", t2v_dec.omega);
  out.emplace_back("t2v_dec.phi", t2v_dec.phi);
  out.emplace_back("input_proj_enc.w", input_proj_enc_w);
  out.emplace_back("input_proj_enc.b", input_proj_enc_b);
  out.emplace_back("input_proj_dec.w", input_proj_dec_w);
  out.emplace_back("input_proj_dec.b", input_proj_dec_b);
  auto attn = [&](const std::string& base, const AttentionParams& a) {
    out.emplace_back(base + ".wq", a.wq);
    out.emplace_back(base + ".wk", a.wk);
    out.emplace_back(base + ".wv", a.wv);
    out.emplace_back(base + ".wo", a.wo);
    out.emplace_back(base + ".bq", a.bq);
    out.emplace_back(base + ".bk", a.bk);
    out.emplace_back(base + ".bv", a.bv);
    out.emplace_back(base + ".bo", a.bo);
  };
  auto ffn = [&](const std::string& base, const FfnParams& f) {
    out.emplace_back(base + ".w1", f.w1);
    out.emplace_back(base + ".b1", f.b1);
    out.emplace_back(base + ".w2", f.w2);
    out.emplace_back(base + ".b2", f.b2);
  };
  auto norm = [&](const std::string& base, const NormParams& n) {
    out.emplace_back(base + ".gain", n.gain);
    out.emplace_back(base + ".bias", n.bias);
  };
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    const std::string base = "encoder." + std::to_string(i);
    attn(base + ".attn", encoder[i].attn);
    norm(base + ".norm1", encoder[i].norm1);
    ffn(base + ".ffn", encoder[i].ffn);
    norm(base + ".norm2", encoder[i].norm2);
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    const std::string base = "decoder." + std::to_string(i);
    attn(base + ".self_attn", decoder[i].self_attn);
    norm(base + ".norm1", decoder[i].norm1);
    attn(base + ".cross_attn", decoder[i].cross_attn);
    norm(base + ".norm2", decoder[i].norm2);
    ffn(base + ".ffn", decoder[i].ffn);
    norm(base + ".norm3", decoder[i].norm3);
  }
  out.emplace_back("lstm.wx", lstm.wx);
  out.emplace_back("lstm.wh", lstm.wh);
  out.emplace_back("lstm.b", lstm.b);
  out.emplace_back("output_proj.w", output_proj_w);
  out.emplace_back("output_proj.b", output_proj_b);
  return out;
}

std::vector<Tensor> ModelParams::all() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t.size();
  return n;
}

Tensor causal_mask(std::size_t L) {
  if (L < 1) throw InvalidConfig("causal_mask: L must be >= 1");
  std::vector<double> m(L * L, 0.0);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 1; j < L; ++j) m[i * L + j] = -1e9;
  return Tensor::from({L, L}, std::move(m));
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const Tensor* mask, const AttentionParams& params,
                            std::size_t n_heads) {
  const std::size_t d = params.wq.rows();
  if (q.shape().size() != 2 || k.shape().size() != 2 ||
      v.shape().size() != 2 || q.cols() != d || k.cols() != d ||
      v.cols() != d || k.rows() != v.rows())
    throw ShapeMismatch("multi_head_attention: operand widths must be d_model");
  if (mask && (mask->rows() != q.rows() || mask->cols() != k.rows()))
    throw ShapeMismatch("multi_head_attention: mask shape must be Tq x Tk");
  const std::size_t dh = d / n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor qp = linear(q, params.wq, params.bq);
  Tensor kp = linear(k, params.wk, params.bk);
  Tensor vp = linear(v, params.wv, params.bv);
  Tensor heads;
  for (std::size_t h = 0; h < n_heads; ++h) {
    Tensor qh = ad::slice(qp, 1, h * dh, dh);
    Tensor kh = ad::slice(kp, 1, h * dh, dh);
    Tensor vh = ad::slice(vp, 1, h * dh, dh);
    Tensor scores =
        ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt_dh);
    if (mask) scores = ad::add(scores, *mask);
    Tensor attn = ad::softmax_last(scores);
    Tensor out_h = ad::matmul(attn, vh);
    heads = h == 0 ? out_h : ad::concat(heads, out_h, 1);
  }
  return linear(heads, params.wo, params.bo);
}

namespace {

Tensor ffn_forward(const Tensor& x, const FfnParams& f) {
  return linear(ad::relu(linear(x, f.w1, f.b1)), f.w2, f.b2);
}

// post-norm residual: norm(x + dropout(sub(x)))
Tensor sublayer(const Tensor& x, const Tensor& sub_out, const NormParams& n,
                double p, bool training, std::mt19937_64& rng) {
  return ad::layer_norm(ad::add(x, ad::dropout(sub_out, p, training, rng)),
                        n.gain, n.bias);
}

}  // namespace

Tensor encoder_forward(const Tensor& enc_in, const ModelParams& params,
                       const ModelConfig& config, bool training,
                       std::mt19937_64& rng) {
  if (enc_in.shape().size() != 2 || enc_in.rows() == 0 ||
      enc_in.cols() != config.enc_input_width())
    throw ShapeMismatch("encoder_forward: bad input shape");
  Tensor x = linear(enc_in, params.input_proj_enc_w, params.input_proj_enc_b);
  for (const auto& l : params.encoder) {
    Tensor a = multi_head_attention(x, x, x, nullptr, l.attn, config.n_heads);
    x = sublayer(x, a, l.norm1, config.dropout, training, rng);
    Tensor f = ffn_forward(x, l.ffn);
    x = sublayer(x, f, l.norm2, config.dropout, training, rng);
  }
  return x;
}

Tensor decoder_forward(const Tensor& dec_in, const Tensor& memory,
                       const ModelParams& params, const ModelConfig& config,
                       bool training, std::mt19937_64& rng) {
  if (dec_in.shape().size() != 2 || dec_in.rows() == 0 ||
      dec_in.cols() != config.dec_input_width())
    throw ShapeMismatch("decoder_forward: bad input shape");
  Tensor mask;
  if (config.use_decoder_mask) mask = causal_mask(dec_in.rows());
  Tensor x = linear(dec_in, params.input_proj_dec_w, params.input_proj_dec_b);
  for (const auto& l : params.decoder) {
    Tensor a = multi_head_attention(
        x, x, x, config.use_decoder_mask ? &mask : nullptr, l.self_attn,
        config.n_heads);
    x = sublayer(x, a, l.norm1, config.dropout, training, rng);
    Tensor c = multi_head_attention(x, memory, memory, nullptr, l.cross_attn,
                                    config.n_heads);
    x = sublayer(x, c, l.norm2, config.dropout, training, rng);
    Tensor f = ffn_forward(x, l.ffn);
    x = sublayer(x, f, l.norm3, config.dropout, training, rng);
  }
  return x;
}

Tensor smooth_and_project(const Tensor& hidden, const ModelParams& params,
                          const ModelConfig& config) {
  const std::size_t L = hidden.rows();
  const std::size_t hid = config.lstm_hidden;
  Tensor h = Tensor::zeros({1, hid});
  Tensor c = Tensor::zeros({1, hid});
  Tensor states;
  for (std::size_t t = 0; t < L; ++t) {
    Tensor xt = ad::slice(hidden, 0, t, 1);
    Tensor gates = ad::add_rowwise(
        ad::add(ad::matmul(xt, params.lstm.wx), ad::matmul(h, params.lstm.wh)),
        params.lstm.b);
    Tensor ig = ad::sigmoid(ad::slice(gates, 1, 0, hid));
    Tensor fg = ad::sigmoid(ad::slice(gates, 1, hid, hid));
    Tensor gg = ad::tanh_op(ad::slice(gates, 1, 2 * hid, hid));
    Tensor og = ad::sigmoid(ad::slice(gates, 1, 3 * hid, hid));
    c = ad::add(ad::mul(fg, c), ad::mul(ig, gg));
    h = ad::mul(og, ad::tanh_op(c));
    states = t == 0 ? h : ad::concat(states, h, 0);
  }
  return linear(states, params.output_proj_w, params.output_proj_b);
}

Tensor model_forward_raw(const std::vector<double>& enc_in,
                         const std::vector<double>& enc_times,
                         std::size_t enc_len,
                         const std::vector<double>& dec_in,
                         const std::vector<double>& dec_times,
                         std::size_t dec_len, const ModelParams& params,
                         const ModelConfig& config, bool training,
                         std::mt19937_64& rng) {
  const std::size_t feat = data::feature_dim(config.family);
  Tensor enc_feat =
      Tensor::from({enc_len, feat}, std::vector<double>(enc_in));
  Tensor dec_feat = Tensor::from({dec_len, 2}, std::vector<double>(dec_in));
  Tensor enc_full =
      attach_time(enc_feat, time2vec_forward(enc_times, params.t2v_enc));
  Tensor dec_full =
      attach_time(dec_feat, time2vec_forward(dec_times, params.t2v_dec));
  Tensor memory = encoder_forward(enc_full, params, config, training, rng);
  Tensor hidden =
      decoder_forward(dec_full, memory, params, config, training, rng);
  return smooth_and_project(hidden, params, config);
}

Tensor model_forward(const data::TrainingExample& example,
                     const ModelParams& params, const ModelConfig& config,
                     bool training, std::mt19937_64& rng) {
  if (example.feat_dim != data::feature_dim(config.family))
    throw ShapeMismatch("example feature dim does not match config family");
  return model_forward_raw(example.enc_in, example.enc_times, example.enc_len,
                           example.dec_in, example.dec_times, example.dec_len,
                           params, config, training, rng);
}

}  // namespace p2t::model
