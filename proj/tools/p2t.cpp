#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "p2t/data.hpp"
#include "p2t/eval.hpp"
#include "p2t/train.hpp"

namespace {

using namespace p2t;

data::ParsedRecords read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open input '" + path + "'");
  return data::parse_frame_records(in, data::format_from_path(path));
}

void write_records(const std::string& path,
                   const std::vector<data::FrameRecord>& records,
                   const data::SeriesMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open output '" + path + "'");
  data::write_frame_records(out, records, meta, data::format_from_path(path));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open output '" + path + "'");
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open input '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ModelFlags {
  std::string family = "F1";
  std::size_t d_model = 128;
  std::size_t n_heads = 8;
  std::size_t n_encoder_layers = 2;
  std::size_t n_decoder_layers = 1;
  std::size_t ffn_dim = 256;
  std::size_t k_time = 15;
  double dropout = 0.1;
  std::string mask = "auto";  // auto|on|off
  std::size_t lstm_hidden = 128;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "Model family: F1|F2|F3|F4");
    cmd->add_option("--d-model", d_model, "Transformer width");
    cmd->add_option("--heads", n_heads, "Attention heads");
    cmd->add_option("--encoder-layers", n_encoder_layers, "Encoder layers");
    cmd->add_option("--decoder-layers", n_decoder_layers, "Decoder layers");
    cmd->add_option("--ffn-dim", ffn_dim, "Feed-forward width");
    cmd->add_option("--k-time", k_time, "Periodic time-embedding components");
    cmd->add_option("--dropout", dropout, "Dropout rate");
    cmd->add_option("--mask", mask,
                    "Decoder sequence mask: auto (family rule)|on|off");
    cmd->add_option("--lstm-hidden", lstm_hidden, "Smoothing unit width");
    cmd->add_option("--seed", seed, "Init / shuffle seed");
  }

  model::ModelConfig to_config(std::size_t enc_frames, std::size_t h_frames,
                               double fps) const {
    model::ModelConfig c = model::default_config_for(
        data::family_from_string(family));
    c.d_model = d_model;
    c.n_heads = n_heads;
    c.n_encoder_layers = n_encoder_layers;
    c.n_decoder_layers = n_decoder_layers;
    c.ffn_dim = ffn_dim;
    c.k_time = k_time;
    c.dropout = dropout;
    c.lstm_hidden = lstm_hidden;
    c.enc_len_frames = enc_frames;
    c.horizon_frames = h_frames;
    c.fps = fps;
    c.seed = seed;
    if (mask == "on")
      c.use_decoder_mask = true;
    else if (mask == "off")
      c.use_decoder_mask = false;
    else if (mask != "auto")
      throw InvalidConfig("--mask must be auto, on or off");
    return c;
  }
};

std::vector<double> parse_ms_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw InvalidParams("empty horizon list");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Player-trajectory forecasting pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file; flags override");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate / convert frame records");
  std::string in_path, out_path;
  ingest->add_option("--input", in_path, "Input .csv or .jsonl")->required();
  ingest->add_option("--output", out_path, "Output .csv or .jsonl")->required();
  ingest->callback([&] {
    auto parsed = read_records(in_path);
    write_records(out_path, parsed.records, parsed.meta);
    std::cerr << "ingested " << parsed.records.size() << " frames\n";
  });

  // gapfill
  auto* gapfill = app.add_subcommand("gapfill", "Repair ball gaps by polynomial fit");
  std::string gf_in, gf_out;
  std::size_t gf_context = 10, gf_degree = 2;
  gapfill->add_option("--input", gf_in)->required();
  gapfill->add_option("--output", gf_out)->required();
  gapfill->add_option("--context", gf_context, "Visible frames per flank");
  gapfill->add_option("--degree", gf_degree, "Polynomial degree");
  gapfill->callback([&] {
    auto parsed = read_records(gf_in);
    auto filled = data::fill_ball_gaps(parsed.records, gf_context, gf_degree);
    write_records(gf_out, filled, parsed.meta);
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic rally");
  data::SynthParams sp;
  std::string synth_out;
  synth->add_option("--output", synth_out)->required();
  synth->add_option("--frames", sp.n_frames, "Frames to generate");
  synth->add_option("--fps", sp.fps);
  synth->add_option("--seed", sp.seed);
  synth->add_option("--pursuit-gain", sp.pursuit_gain);
  synth->add_option("--joint-jitter", sp.joint_jitter_px);
  synth->add_option("--ball-speed", sp.ball_speed_px_per_frame);
  synth->add_option("--occlusion-prob", sp.occlusion_gap_prob);
  synth->add_option("--width", sp.frame_w);
  synth->add_option("--height", sp.frame_h);
  synth->callback([&] {
    auto records = data::synth_rally(sp);
    data::SeriesMeta meta{sp.frame_w, sp.frame_h, sp.fps};
    write_records(synth_out, records, meta);
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Teacher-forcing training");
  std::string tr_in, ckpt_out = "model.ckpt", metrics_out = "metrics.csv";
  double enc_ms = 500.0, horizon_ms = 500.0;
  std::size_t stride = 1;
  int target_player = 1;
  ModelFlags mf;
  train::TrainConfig tc;
  train_cmd->add_option("--input", tr_in)->required();
  train_cmd->add_option("--enc-ms", enc_ms, "Encoder window length (ms)");
  train_cmd->add_option("--horizon-ms", horizon_ms, "Prediction horizon (ms)");
  train_cmd->add_option("--stride", stride, "Training window stride (frames)");
  train_cmd->add_option("--target-player", target_player, "1 or 2");
  mf.attach(train_cmd);
  train_cmd->add_option("--epochs", tc.epochs);
  train_cmd->add_option("--batch-size", tc.batch_size);
  train_cmd->add_option("--lr", tc.lr);
  train_cmd->add_option("--weight-decay", tc.weight_decay);
  train_cmd->add_option("--val-fraction", tc.validation_fraction);
  train_cmd->add_option("--checkpoint-out", ckpt_out);
  train_cmd->add_option("--metrics-out", metrics_out);
  train_cmd->callback([&] {
    auto parsed = read_records(tr_in);
    const auto cfg = mf.to_config(
        data::ms_to_frames(enc_ms, parsed.meta.fps),
        data::ms_to_frames(horizon_ms, parsed.meta.fps), parsed.meta.fps);
    tc.shuffle_seed = mf.seed;
    auto series =
        data::build_feature_series(parsed.records, cfg.family, parsed.meta);
    auto windows = data::make_windows(series, cfg.enc_len_frames,
                                      cfg.horizon_frames, target_player,
                                      stride);
    auto ckpt = train::train(windows, cfg, tc);
    train::save_checkpoint_file(ckpt, ckpt_out);
    std::ostringstream ms;
    ms << "# model=" << train::model_config_to_json(cfg).dump()
       << " train=" << train::train_config_to_json(tc).dump() << '\n';
    std::ostringstream body;
    train::write_metrics_csv(body, ckpt.metrics_log);
    write_text(metrics_out, ms.str() + body.str());
    std::cerr << "trained on " << windows.size() << " windows, final train mse "
              << ckpt.metrics_log.back().train_mse << '\n';
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Forecast a trajectory");
  std::string pr_ckpt, pr_in, pr_out = "trajectory.csv";
  std::int64_t at_frame = -1;
  double pr_horizon_ms = 500.0;
  predict->add_option("--checkpoint", pr_ckpt)->required();
  predict->add_option("--input", pr_in)->required();
  predict->add_option("--at-frame", at_frame,
                      "Last observed frame_index (default: last in input)");
  predict->add_option("--horizon-ms", pr_horizon_ms);
  predict->add_option("--output", pr_out);
  predict->callback([&] {
    auto ckpt = train::load_checkpoint_file(pr_ckpt);
    auto parsed = read_records(pr_in);
    auto& records = parsed.records;
    if (at_frame >= 0) {
      std::size_t keep = 0;
      while (keep < records.size() && records[keep].frame_index <= at_frame)
        ++keep;
      records.resize(keep);
    }
    auto series = data::build_feature_series(
        records, ckpt.model_config.family, parsed.meta);
    const std::size_t h =
        data::ms_to_frames(pr_horizon_ms, parsed.meta.fps);
    auto pred = train::predict_trajectory(ckpt, series, h);
    if (pred.horizon_exceeds_trained)
      std::cerr << "warning: horizon exceeds the trained horizon; "
                   "out-of-distribution prediction\n";
    std::ostringstream out;
    out << "# model=" << train::model_config_to_json(ckpt.model_config).dump()
        << " horizon_frames=" << h << '\n';
    out << "step,x_px,y_px\n";
    for (std::size_t i = 0; i < pred.len; ++i)
      out << i << ',' << pred.points[i * 2] * series.width_px << ','
          << pred.points[i * 2 + 1] * series.height_px << '\n';
    write_text(pr_out, out.str());
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Grid evaluation");
  std::string ev_in, ev_out = "results.csv", ev_mode = "autoregressive";
  std::string ev_horizons = "50,100,150,200,250,500,1000";
  std::string traces_dir;
  std::vector<std::string> ev_ckpts;
  int ev_player = 1;
  evaluate->add_option("--input", ev_in)->required();
  evaluate->add_option("--checkpoint", ev_ckpts, "May be given repeatedly")
      ->required();
  evaluate->add_option("--horizons", ev_horizons, "Comma-separated ms list");
  evaluate->add_option("--mode", ev_mode, "autoregressive|teacher_forced");
  evaluate->add_option("--target-player", ev_player);
  evaluate->add_option("--output", ev_out);
  evaluate->add_option("--traces-dir", traces_dir,
                       "Directory for predicted-vs-truth trace files");
  evaluate->callback([&] {
    auto parsed = read_records(ev_in);
    std::vector<train::Checkpoint> ckpts;
    for (const auto& p : ev_ckpts)
      ckpts.push_back(train::load_checkpoint_file(p));
    auto grid = eval::evaluate_grid(ckpts, parsed.records, parsed.meta,
                                    parse_ms_list(ev_horizons),
                                    eval::mode_from_string(ev_mode),
                                    ev_player);
    std::ostringstream note;
    note << "scale=" << parsed.meta.width_px << 'x' << parsed.meta.height_px
         << " fps=" << parsed.meta.fps << " mode=" << ev_mode
         << " stride=horizon target_player=" << ev_player;
    write_text(ev_out, eval::emit_report(grid.results, eval::ReportFormat::csv,
                                         note.str()));
    if (!traces_dir.empty()) {
      std::filesystem::create_directories(traces_dir);
      for (const auto& tr : grid.traces) {
        std::ostringstream name;
        name << traces_dir << '/' << data::to_string(tr.family) << "_train"
             << tr.train_len_ms << "_h" << tr.horizon_ms << ".csv";
        write_text(name.str(), eval::emit_trace_csv(tr));
      }
    }
  });

  // report
  auto* report = app.add_subcommand("report", "Re-render an evaluation table");
  std::string rp_in, rp_out, rp_from = "csv", rp_format = "md";
  report->add_option("--input", rp_in)->required();
  report->add_option("--from", rp_from, "Input format: csv|json");
  report->add_option("--format", rp_format, "Output format: csv|json|md");
  report->add_option("--output", rp_out)->required();
  report->callback([&] {
    auto results = eval::parse_report(
        slurp(rp_in), eval::report_format_from_string(rp_from));
    write_text(rp_out,
               eval::emit_report(results,
                                 eval::report_format_from_string(rp_format),
                                 "regenerated from " + rp_in));
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const p2t::ArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const p2t::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const p2t::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
