#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "p2t/data.hpp"

namespace p2t::data {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw SchemaError("line " + std::to_string(line_no) +
                      ": bad numeric field '" + std::string(s) + "'");
  return v;
}

std::string csv_header() {
  std::string h = "frame_index,timestamp_ms,p1_cx,p1_cy";
  for (int j = 0; j < 17; ++j) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), ",p1_j%02d_x,p1_j%02d_y", j, j);
    h += buf;
  }
  h += ",p2_cx,p2_cy";
  for (int j = 0; j < 17; ++j) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), ",p2_j%02d_x,p2_j%02d_y", j, j);
    h += buf;
  }
  h += ",ball_x,ball_y,ball_visible";
  return h;
}

constexpr std::size_t kCsvColumns = 77;  // 2 metadata + 75 data

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

SeriesMeta parse_csv_meta(const std::string& line) {
  // "# frame_size=WxH fps=F"
  SeriesMeta meta;
  std::istringstream ss(line);
  std::string tok;
  ss >> tok;
  if (tok != "#") throw SchemaError("missing metadata comment line");
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "frame_size") {
      const auto x = val.find('x');
      if (x == std::string::npos) throw SchemaError("bad frame_size");
      meta.width_px = parse_double(std::string_view(val).substr(0, x), 1);
      meta.height_px = parse_double(std::string_view(val).substr(x + 1), 1);
    } else if (key == "fps") {
      meta.fps = parse_double(val, 1);
    }
  }
  return meta;
}

FrameRecord parse_csv_row(std::string_view line, std::size_t line_no) {
  const auto f = split_csv(line);
  if (f.size() != kCsvColumns)
    throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(kCsvColumns) + " columns, got " +
                      std::to_string(f.size()));
  FrameRecord r;
  std::size_t i = 0;
  r.frame_index = static_cast<std::int64_t>(parse_double(f[i++], line_no));
  r.timestamp_ms = parse_double(f[i++], line_no);
  r.p1_centroid = {parse_double(f[i], line_no), parse_double(f[i + 1], line_no)};
  i += 2;
  for (auto& j : r.p1_joints) {
    j = {parse_double(f[i], line_no), parse_double(f[i + 1], line_no)};
    i += 2;
  }
  r.p2_centroid = {parse_double(f[i], line_no), parse_double(f[i + 1], line_no)};
  i += 2;
  for (auto& j : r.p2_joints) {
    j = {parse_double(f[i], line_no), parse_double(f[i + 1], line_no)};
    i += 2;
  }
  const std::string_view bx = f[i], by = f[i + 1], bv = f[i + 2];
  if (bv == "1") {
    r.ball = Point{parse_double(bx, line_no), parse_double(by, line_no)};
  } else if (bv == "0") {
    if (!bx.empty() || !by.empty())
      throw SchemaError("line " + std::to_string(line_no) +
                        ": ball coordinates present but ball_visible=0");
    r.ball.reset();
  } else {
    throw SchemaError("line " + std::to_string(line_no) +
                      ": ball_visible must be 0 or 1");
  }
  return r;
}

void write_csv_row(std::ostream& out, const FrameRecord& r) {
  out << r.frame_index << ',' << fmt(r.timestamp_ms);
  out << ',' << fmt(r.p1_centroid.x) << ',' << fmt(r.p1_centroid.y);
  for (const auto& j : r.p1_joints) out << ',' << fmt(j.x) << ',' << fmt(j.y);
  out << ',' << fmt(r.p2_centroid.x) << ',' << fmt(r.p2_centroid.y);
  for (const auto& j : r.p2_joints) out << ',' << fmt(j.x) << ',' << fmt(j.y);
  if (r.ball)
    out << ',' << fmt(r.ball->x) << ',' << fmt(r.ball->y) << ",1";
  else
    out << ",,,0";
  out << '\n';
}

json record_to_json(const FrameRecord& r) {
  json o;
  o["frame_index"] = r.frame_index;
  o["timestamp_ms"] = r.timestamp_ms;
  o["p1_centroid"] = {r.p1_centroid.x, r.p1_centroid.y};
  json j1 = json::array();
  for (const auto& j : r.p1_joints) j1.push_back({j.x, j.y});
  o["p1_joints"] = std::move(j1);
  o["p2_centroid"] = {r.p2_centroid.x, r.p2_centroid.y};
  json j2 = json::array();
  for (const auto& j : r.p2_joints) j2.push_back({j.x, j.y});
  o["p2_joints"] = std::move(j2);
  if (r.ball)
    o["ball"] = {r.ball->x, r.ball->y};
  else
    o["ball"] = nullptr;
  o["ball_visible"] = r.ball_visible();
  return o;
}

FrameRecord record_from_json(const json& o, std::size_t line_no) {
  try {
    FrameRecord r;
    r.frame_index = o.at("frame_index").get<std::int64_t>();
    r.timestamp_ms = o.at("timestamp_ms").get<double>();
    auto pt = [](const json& a) {
      return Point{a.at(0).get<double>(), a.at(1).get<double>()};
    };
    r.p1_centroid = pt(o.at("p1_centroid"));
    const auto& j1 = o.at("p1_joints");
    const auto& j2 = o.at("p2_joints");
    if (j1.size() != kNumJoints || j2.size() != kNumJoints)
      throw SchemaError("line " + std::to_string(line_no) +
                        ": expected 17 joints per player");
    for (std::size_t i = 0; i < kNumJoints; ++i) r.p1_joints[i] = pt(j1[i]);
    r.p2_centroid = pt(o.at("p2_centroid"));
    for (std::size_t i = 0; i < kNumJoints; ++i) r.p2_joints[i] = pt(j2[i]);
    const bool visible = o.at("ball_visible").get<bool>();
    if (visible != !o.at("ball").is_null())
      throw SchemaError("line " + std::to_string(line_no) +
                        ": ball_visible inconsistent with ball field");
    if (visible) r.ball = pt(o.at("ball"));
    return r;
  } catch (const json::exception& e) {
    throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

ParsedRecords parse_frame_records(std::istream& in, Format format) {
  ParsedRecords out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw SchemaError("empty input");
  ++line_no;
  if (format == Format::csv) {
    out.meta = parse_csv_meta(line);
    if (!std::getline(in, line) || line != csv_header())
      throw SchemaError("line 2: missing or malformed CSV header");
    ++line_no;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      out.records.push_back(parse_csv_row(line, line_no));
    }
  } else {
    json meta;
    try {
      meta = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("line 1: ") + e.what());
    }
    out.meta.fps = meta.value("fps", 60.0);
    if (meta.contains("frame_size")) {
      out.meta.width_px = meta["frame_size"].at(0).get<double>();
      out.meta.height_px = meta["frame_size"].at(1).get<double>();
    }
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json o;
      try {
        o = json::parse(line);
      } catch (const json::exception& e) {
        throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
      }
      out.records.push_back(record_from_json(o, line_no));
    }
  }
  for (std::size_t i = 1; i < out.records.size(); ++i)
    if (out.records[i].frame_index <= out.records[i - 1].frame_index)
      throw NonMonotoneFrames("frame_index not strictly increasing at record " +
                              std::to_string(i));
  return out;
}

void write_frame_records(std::ostream& out,
                         const std::vector<FrameRecord>& records,
                         const SeriesMeta& meta, Format format) {
  if (format == Format::csv) {
    out << "# frame_size=" << fmt(meta.width_px) << 'x' << fmt(meta.height_px)
        << " fps=" << fmt(meta.fps) << '\n';
    out << csv_header() << '\n';
    for (const auto& r : records) write_csv_row(out, r);
  } else {
    json m;
    m["fps"] = meta.fps;
    m["frame_size"] = {meta.width_px, meta.height_px};
    out << m.dump() << '\n';
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  }
}

Format format_from_path(const std::string& path) {
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl")
    return Format::jsonl;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return Format::csv;
  throw SchemaError("cannot infer format from path '" + path +
                    "' (expected .csv or .jsonl)");
}

}  // namespace p2t::data
