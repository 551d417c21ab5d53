#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>

#include "p2t/train.hpp"

namespace p2t::train {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', '2', 'T', 'J'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw TruncatedPayload("checkpoint truncated in fixed header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw TruncatedPayload("checkpoint truncated in fixed header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

// doubles in the payload are raw little-endian IEEE-754
void put_f64s(std::ostream& out, const std::vector<double>& v) {
  static_assert(sizeof(double) == 8);
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
  }
}

std::vector<double> get_f64s(std::istream& in, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = get_u64(in);
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}

double json_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

}  // namespace

json model_config_to_json(const model::ModelConfig& c) {
  return json{{"family", data::to_string(c.family)},
              {"d_model", c.d_model},
              {"n_heads", c.n_heads},
              {"n_encoder_layers", c.n_encoder_layers},
              {"n_decoder_layers", c.n_decoder_layers},
              {"ffn_dim", c.ffn_dim},
              {"k_time", c.k_time},
              {"dropout", c.dropout},
              {"use_decoder_mask", c.use_decoder_mask},
              {"lstm_hidden", c.lstm_hidden},
              {"enc_len_frames", c.enc_len_frames},
              {"horizon_frames", c.horizon_frames},
              {"fps", c.fps},
              {"seed", c.seed}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig c;
  c.family = data::family_from_string(j.at("family").get<std::string>());
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.n_encoder_layers = j.at("n_encoder_layers").get<std::size_t>();
  c.n_decoder_layers = j.at("n_decoder_layers").get<std::size_t>();
  c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  c.k_time = j.at("k_time").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.use_decoder_mask = j.at("use_decoder_mask").get<bool>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.enc_len_frames = j.at("enc_len_frames").get<std::size_t>();
  c.horizon_frames = j.at("horizon_frames").get<std::size_t>();
  c.fps = j.at("fps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"shuffle_seed", c.shuffle_seed},
              {"validation_fraction", c.validation_fraction}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  return c;
}

void save_checkpoint(const Checkpoint& c, std::ostream& sink) {
  const auto named = c.params.named();
  json header;
  header["model_config"] = model_config_to_json(c.model_config);
  header["train_config"] = train_config_to_json(c.train_config);
  header["epoch"] = c.epoch;
  json metrics = json::array();
  for (const auto& m : c.metrics_log) {
    json e;
    e["epoch"] = m.epoch;
    e["train_mse"] = m.train_mse;
    e["val_mse"] = std::isnan(m.val_mse) ? json(nullptr) : json(m.val_mse);
    metrics.push_back(std::move(e));
  }
  header["metrics_log"] = std::move(metrics);
  header["has_adam_state"] = c.adam_state.has_value();
  if (c.adam_state) header["adam_step_count"] = c.adam_state->step_count;

  json dir = json::array();
  std::uint64_t offset = 0;
  auto add_entry = [&](const std::string& name,
                       const std::vector<std::size_t>& shape,
                       std::size_t count) {
    json e;
    e["name"] = name;
    e["shape"] = shape;
    e["offset"] = offset;
    dir.push_back(std::move(e));
    offset += count * 8;
  };
  for (const auto& [name, t] : named)
    add_entry(name, t.shape(), t.size());
  if (c.adam_state) {
    for (std::size_t i = 0; i < named.size(); ++i) {
      add_entry("adam.m." + named[i].first, named[i].second.shape(),
                named[i].second.size());
      add_entry("adam.v." + named[i].first, named[i].second.shape(),
                named[i].second.size());
    }
  }
  header["tensors"] = std::move(dir);
  const std::string header_text = header.dump();

  sink.write(kMagic, 4);
  put_u32(sink, static_cast<std::uint32_t>(c.format_version));
  put_u64(sink, header_text.size());
  sink.write(header_text.data(),
             static_cast<std::streamsize>(header_text.size()));
  for (const auto& [name, t] : named) put_f64s(sink, t.data());
  if (c.adam_state) {
    for (std::size_t i = 0; i < named.size(); ++i) {
      put_f64s(sink, c.adam_state->m[i]);
      put_f64s(sink, c.adam_state->v[i]);
    }
  }
}

Checkpoint load_checkpoint(std::istream& source) {
  char magic[4];
  source.read(magic, 4);
  if (!source || std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagic("not a checkpoint file");
  const std::uint32_t version = get_u32(source);
  if (version != static_cast<std::uint32_t>(kCheckpointVersion))
    throw VersionMismatch("checkpoint format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  const std::uint64_t header_len = get_u64(source);
  std::string header_text(header_len, '\0');
  source.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!source) throw TruncatedPayload("checkpoint truncated in header");
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw ShapeDirectoryMismatch(std::string("bad checkpoint header: ") +
                                 e.what());
  }

  Checkpoint c;
  c.format_version = static_cast<int>(version);
  c.model_config = model_config_from_json(header.at("model_config"));
  c.train_config = train_config_from_json(header.at("train_config"));
  c.epoch = header.at("epoch").get<std::size_t>();
  for (const auto& e : header.at("metrics_log")) {
    EpochMetrics m;
    m.epoch = e.at("epoch").get<std::size_t>();
    m.train_mse = e.at("train_mse").get<double>();
    m.val_mse = json_or_nan(e.at("val_mse"));
    c.metrics_log.push_back(m);
  }

  // rebuild parameter structure from config, then overwrite from the payload
  c.params = model::init_params(c.model_config);
  auto named = c.params.named();
  const auto& dir = header.at("tensors");
  const bool has_adam = header.at("has_adam_state").get<bool>();
  const std::size_t expected_entries = named.size() * (has_adam ? 3 : 1);
  if (dir.size() != expected_entries)
    throw ShapeDirectoryMismatch("tensor directory entry count mismatch");

  std::size_t dir_i = 0;
  std::uint64_t expected_offset = 0;
  auto read_into = [&](const std::string& want_name,
                       const std::vector<std::size_t>& want_shape,
                       std::vector<double>& dst) {
    const auto& e = dir.at(dir_i++);
    if (e.at("name").get<std::string>() != want_name ||
        e.at("shape").get<std::vector<std::size_t>>() != want_shape)
      throw ShapeDirectoryMismatch("tensor directory mismatch at '" +
                                   want_name + "'");
    if (e.at("offset").get<std::uint64_t>() != expected_offset)
      throw ShapeDirectoryMismatch("tensor offset mismatch at '" + want_name +
                                   "'");
    std::size_t count = 1;
    for (auto s : want_shape) count *= s;
    dst = get_f64s(source, count);
    expected_offset += count * 8;
  };

  for (auto& [name, t] : named) {
    std::vector<double> buf;
    read_into(name, t.shape(), buf);
    t.mutable_data() = std::move(buf);
  }
  if (has_adam) {
    ad::AdamState state;
    state.step_count = header.at("adam_step_count").get<std::uint64_t>();
    state.m.resize(named.size());
    state.v.resize(named.size());
    for (std::size_t i = 0; i < named.size(); ++i) {
      read_into("adam.m." + named[i].first, named[i].second.shape(),
                state.m[i]);
      read_into("adam.v." + named[i].first, named[i].second.shape(),
                state.v[i]);
    }
    c.adam_state = std::move(state);
  }
  return c;
}

void save_checkpoint_file(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
  save_checkpoint(c, out);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCheckpoint("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace p2t::train
