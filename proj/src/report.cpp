#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "p2t/eval.hpp"

namespace p2t::eval {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw SchemaError("report: bad numeric field '" + s + "'");
  return v;
}

std::string horizon_label(double ms) {
  if (ms >= 1000.0 && std::fmod(ms, 1000.0) == 0.0)
    return fmt(ms / 1000.0) + " s";
  return fmt(ms) + " ms";
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "md") return ReportFormat::md;
  throw InvalidParams("unknown report format '" + s + "'");
}

std::string emit_report(const std::vector<EvalResult>& results,
                        ReportFormat format, const std::string& header_note) {
  if (results.empty()) throw EmptySequence("emit_report: empty table");
  std::ostringstream out;
  switch (format) {
    case ReportFormat::csv: {
      if (!header_note.empty()) out << "# " << header_note << '\n';
      out << "family,train_ms,horizon_ms,mede_px,n_windows,mode\n";
      for (const auto& r : results)
        out << data::to_string(r.family) << ',' << fmt(r.train_len_ms) << ','
            << fmt(r.horizon_ms) << ',' << fmt(r.mede_px) << ','
            << r.n_windows << ',' << to_string(r.mode) << '\n';
      break;
    }
    case ReportFormat::json: {
      json doc;
      doc["note"] = header_note;
      json rows = json::array();
      for (const auto& r : results)
        rows.push_back(json{{"family", data::to_string(r.family)},
                            {"train_ms", r.train_len_ms},
                            {"horizon_ms", r.horizon_ms},
                            {"mede_px", r.mede_px},
                            {"n_windows", r.n_windows},
                            {"mode", to_string(r.mode)}});
      doc["results"] = std::move(rows);
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::md: {
      // matrix shaped like the evaluation grid: one row per (family,
      // train length), one column per horizon
      std::vector<double> horizons;
      for (const auto& r : results)
        if (std::find(horizons.begin(), horizons.end(), r.horizon_ms) ==
            horizons.end())
          horizons.push_back(r.horizon_ms);
      std::sort(horizons.begin(), horizons.end());
      std::map<std::pair<std::string, double>, std::map<double, double>> grid;
      for (const auto& r : results)
        grid[{data::to_string(r.family), r.train_len_ms}][r.horizon_ms] =
            r.mede_px;
      if (!header_note.empty()) out << "> " << header_note << "\n\n";
      out << "| Model Name | Training Seq-len |";
      for (double h : horizons) out << ' ' << horizon_label(h) << " |";
      out << "\n|---|---|";
      for (std::size_t i = 0; i < horizons.size(); ++i) out << "---|";
      out << '\n';
      for (const auto& [key, row] : grid) {
        out << "| " << key.first << " | " << horizon_label(key.second)
            << " |";
        for (double h : horizons) {
          auto it = row.find(h);
          out << ' ' << (it == row.end() ? std::string("-") : fmt(it->second))
              << " |";
        }
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

std::vector<EvalResult> parse_report(const std::string& text,
                                     ReportFormat format) {
  std::vector<EvalResult> out;
  if (format == ReportFormat::json) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("report json: ") + e.what());
    }
    for (const auto& r : doc.at("results")) {
      EvalResult e;
      e.family = data::family_from_string(r.at("family").get<std::string>());
      e.train_len_ms = r.at("train_ms").get<double>();
      e.horizon_ms = r.at("horizon_ms").get<double>();
      e.mede_px = r.at("mede_px").get<double>();
      e.n_windows = r.at("n_windows").get<std::size_t>();
      e.mode = mode_from_string(r.at("mode").get<std::string>());
      out.push_back(e);
    }
    return out;
  }
  if (format != ReportFormat::csv)
    throw InvalidParams("parse_report: only csv and json are parseable");
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "family,train_ms,horizon_ms,mede_px,n_windows,mode")
        throw SchemaError("report csv: bad header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) f.push_back(tok);
    if (f.size() != 6) throw SchemaError("report csv: bad row '" + line + "'");
    EvalResult e;
    e.family = data::family_from_string(f[0]);
    e.train_len_ms = parse_double(f[1]);
    e.horizon_ms = parse_double(f[2]);
    e.mede_px = parse_double(f[3]);
    e.n_windows = static_cast<std::size_t>(parse_double(f[4]));
    e.mode = mode_from_string(f[5]);
    out.push_back(e);
  }
  if (!header_seen) throw SchemaError("report csv: missing header");
  return out;
}

std::string emit_trace_csv(const Trace& t) {
  std::ostringstream out;
  out << "# family=" << data::to_string(t.family)
      << " train_ms=" << fmt(t.train_len_ms)
      << " horizon_ms=" << fmt(t.horizon_ms) << '\n';
  out << "step,truth_x,truth_y,pred_x,pred_y\n";
  const std::size_t L = t.truth.size() / 2;
  for (std::size_t i = 0; i < L; ++i)
    out << i << ',' << fmt(t.truth[i * 2]) << ',' << fmt(t.truth[i * 2 + 1])
        << ',' << fmt(t.pred[i * 2]) << ',' << fmt(t.pred[i * 2 + 1]) << '\n';
  return out.str();
}

}  // namespace p2t::eval
