#pragma once

// CSV and JSON forms of trajectory records.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sacfgm/optimizer.hpp"

namespace sacfgm {

inline constexpr const char* kRecordColumns = "k,gap,eta,l_bar,m,n,r,calls_total,sigma_sq,v,red_grad,wall_ms";

/// 17 significant digits, enough to round-trip any double.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

inline void write_records_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out << kRecordColumns << '\n';
  for (const auto& r : records) {
    out << r.k << ',' << fmt_optional(r.gap) << ',' << fmt_double(r.eta) << ',' << fmt_double(r.l_bar) << ','
        << r.m << ',' << r.n << ',' << r.r << ',' << r.calls_total << ',' << fmt_double(r.sigma_sq) << ','
        << fmt_double(r.v) << ',' << fmt_optional(r.red_grad) << ',' << fmt_double(r.wall_ms) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError(where + ": not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError(where + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

/// Inverse of write_records_csv for the CSV columns; in-memory extras stay default.
inline std::vector<TrajectoryRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordColumns) throw ConfigError("records csv: unexpected header");
  std::vector<TrajectoryRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto c = detail::split_csv_line(line);
    const std::string where = "records csv row " + std::to_string(row);
    if (c.size() != 12) throw ConfigError(where + ": expected 12 columns");
    TrajectoryRecord r;
    r.k = detail::parse_u64(c[0], where);
    if (!c[1].empty()) r.gap = detail::parse_double(c[1], where);
    r.eta = detail::parse_double(c[2], where);
    r.l_bar = detail::parse_double(c[3], where);
    r.m = detail::parse_u64(c[4], where);
    r.n = detail::parse_u64(c[5], where);
    r.r = detail::parse_u64(c[6], where);
    r.calls_total = detail::parse_u64(c[7], where);
    r.sigma_sq = detail::parse_double(c[8], where);
    r.v = detail::parse_double(c[9], where);
    if (!c[10].empty()) r.red_grad = detail::parse_double(c[10], where);
    r.wall_ms = detail::parse_double(c[11], where);
    out.push_back(r);
  }
  return out;
}

inline nlohmann::json records_to_json(const std::vector<TrajectoryRecord>& records) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["k"] = r.k;
    j["gap"] = r.gap ? nlohmann::json(*r.gap) : nlohmann::json(nullptr);
    j["eta"] = r.eta;
    j["l_bar"] = r.l_bar;
    j["m"] = r.m;
    j["n"] = r.n;
    j["r"] = r.r;
    j["calls_total"] = r.calls_total;
    j["sigma_sq"] = r.sigma_sq;
    j["v"] = r.v;
    j["red_grad"] = r.red_grad ? nlohmann::json(*r.red_grad) : nlohmann::json(nullptr);
    j["wall_ms"] = r.wall_ms;
    a.push_back(std::move(j));
  }
  return a;
}

inline std::vector<TrajectoryRecord> records_from_json(const nlohmann::json& a) {
  if (!a.is_array()) throw ConfigError("records: expected an array");
  std::vector<TrajectoryRecord> out;
  try {
    for (const auto& j : a) {
      TrajectoryRecord r;
      r.k = j.at("k").get<std::uint64_t>();
      if (!j.at("gap").is_null()) r.gap = j.at("gap").get<double>();
      r.eta = j.at("eta").get<double>();
      r.l_bar = j.at("l_bar").get<double>();
      r.m = j.at("m").get<std::uint64_t>();
      r.n = j.at("n").get<std::uint64_t>();
      r.r = j.at("r").get<std::uint64_t>();
      r.calls_total = j.at("calls_total").get<std::uint64_t>();
      r.sigma_sq = j.at("sigma_sq").get<double>();
      r.v = j.at("v").get<double>();
      if (!j.at("red_grad").is_null()) r.red_grad = j.at("red_grad").get<double>();
      r.wall_ms = j.at("wall_ms").get<double>();
      out.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("records: ") + e.what());
  }
  return out;
}

/// Field-by-field equality on the exported columns.
inline bool same_exported_fields(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  return a.k == b.k && a.gap == b.gap && a.eta == b.eta && a.l_bar == b.l_bar && a.m == b.m && a.n == b.n &&
         a.r == b.r && a.calls_total == b.calls_total && a.sigma_sq == b.sigma_sq && a.v == b.v &&
         a.red_grad == b.red_grad && a.wall_ms == b.wall_ms;
}

}  // namespace sacfgm
