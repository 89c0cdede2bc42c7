#pragma once

// File formats: trajectory CSV, step-event JSON, heightmap JSON and a small
// strict CSV reader. Numbers are written locale-independently with 17
// significant digits so that files round-trip bit-exactly.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "liprint/sim.hpp"
#include "liprint/terrain.hpp"

namespace liprint::io {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

inline double parse_double(std::string_view s)
{
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

// --- generic CSV ------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::ptrdiff_t column(std::string_view name) const
  {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Reads a numeric CSV with one header line. An empty stream gives an empty table.
inline CsvTable read_csv(std::istream& in)
{
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                        " columns, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& values)
{
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  out << '\n';
}

inline void write_csv_header(std::ostream& out, const std::vector<std::string>& names)
{
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
}

// --- trajectory CSV -----------------------------------------------------------------

inline const std::vector<std::string>& trajectory_columns()
{
  static const std::vector<std::string> cols = {
      "time",     "com_x",    "com_y",    "vel_x",          "vel_y",           "icp_x",     "icp_y",
      "stance_x", "stance_y", "stance_z", "target_x",       "target_y",        "target_z",  "target_heading",
      "parity",   "contact_schedule",     "phase_sin",      "phase_cos",       "outcome_flag"};
  return cols;
}

inline std::vector<double> trajectory_row(const TrajectorySample& s)
{
  return {s.time,
          s.com_pos.x(),
          s.com_pos.y(),
          s.com_vel.x(),
          s.com_vel.y(),
          s.icp.x(),
          s.icp.y(),
          s.stance.p.x(),
          s.stance.p.y(),
          s.stance.z,
          s.target.position.x(),
          s.target.position.y(),
          s.target.z,
          s.target.heading,
          static_cast<double>(s.parity),
          s.contact_schedule,
          s.phase.sin,
          s.phase.cos,
          s.failed ? 1.0 : 0.0};
}

inline void write_trajectory_csv(std::ostream& out, const SimResult& r)
{
  write_csv_header(out, trajectory_columns());
  for (const auto& s : r.samples) write_csv_row(out, trajectory_row(s));
}

/// Parses a trajectory CSV. The header must match trajectory_columns() exactly.
inline std::vector<TrajectorySample> read_trajectory_csv(std::istream& in)
{
  const CsvTable t = read_csv(in);
  std::vector<TrajectorySample> out;
  if (t.header.empty()) return out;
  if (t.header != trajectory_columns()) throw FormatError("trajectory CSV: unexpected columns");
  out.reserve(t.rows.size());
  for (const auto& v : t.rows) {
    TrajectorySample s;
    s.time = v[0];
    s.com_pos = {v[1], v[2]};
    s.com_vel = {v[3], v[4]};
    s.icp = {v[5], v[6]};
    s.stance = {Vec2(v[7], v[8]), v[9]};
    s.target.position = {v[10], v[11]};
    s.target.z = v[12];
    s.target.heading = v[13];
    if (v[14] != std::floor(v[14]) || v[14] < 0) throw FormatError("trajectory CSV: parity must be a non-negative integer");
    s.parity = static_cast<std::int64_t>(v[14]);
    s.target.parity = s.parity;
    s.contact_schedule = v[15];
    s.phase = {v[16], v[17]};
    s.failed = v[18] != 0.0;
    out.push_back(s);
  }
  return out;
}

// --- step events ----------------------------------------------------------------------

inline json to_json(const Outcome& o)
{
  return {{"completed", o.completed}, {"reason", o.reason}, {"time", o.time}};
}

inline json step_events_json(const SimResult& r)
{
  json events = json::array();
  for (const auto& e : r.step_events) {
    events.push_back({{"time", e.time},
                      {"parity", e.planned.parity},
                      {"planned",
                       {{"x", e.planned.position.x()},
                        {"y", e.planned.position.y()},
                        {"z", e.planned.z},
                        {"heading", e.planned.heading}}},
                      {"realized", {{"x", e.realized.p.x()}, {"y", e.realized.p.y()}, {"z", e.realized.z}}},
                      {"icp", {e.icp.x(), e.icp.y()}}});
  }
  return {{"events", events}, {"outcome", to_json(r.outcome)}};
}

// --- heightmap JSON -------------------------------------------------------------------

inline json heightmap_to_json(const Heightmap& h)
{
  json mask = json::array();
  for (auto m : h.gap_mask()) mask.push_back(static_cast<int>(m));
  return {{"origin", {h.origin().x(), h.origin().y()}},
          {"resolution", h.resolution()},
          {"rows", h.rows()},
          {"cols", h.cols()},
          {"heights", h.heights()},
          {"mask", mask}};
}

inline Heightmap heightmap_from_json(const json& j)
{
  try {
    const auto origin = j.at("origin").get<std::vector<double>>();
    if (origin.size() != 2) throw FormatError("heightmap: origin must have two entries");
    std::vector<std::uint8_t> mask;
    if (j.contains("mask")) {
      for (const auto& m : j.at("mask")) mask.push_back(m.get<int>() != 0 ? 1 : 0);
    }
    return {Vec2(origin[0], origin[1]), j.at("resolution").get<double>(), j.at("rows").get<int>(),
            j.at("cols").get<int>(), j.at("heights").get<std::vector<double>>(), std::move(mask)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("heightmap JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("heightmap JSON: ") + e.what());
  }
}

}  // namespace liprint::io
