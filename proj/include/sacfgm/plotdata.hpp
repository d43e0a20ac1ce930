#pragma once

// Tab-separated plot data. Each file starts with a header naming its columns.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "sacfgm/records.hpp"

namespace sacfgm {

struct LabeledSeries {
  std::string label;
  std::vector<TrajectoryRecord> records;  // already averaged over seeds when comparing
};

namespace detail {

inline std::ofstream open_tsv(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write '" + file.string() + "'");
  return out;
}

inline std::string cell(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string("nan"); }

}  // namespace detail

/// Writes gap_vs_k.tsv, eta_vs_k.tsv, batch_vs_k.tsv and calls_vs_gap.tsv.
/// Returns the written paths.
inline std::vector<std::filesystem::path> emit_plotdata(const std::vector<TrajectoryRecord>& records,
                                                        const std::filesystem::path& dir,
                                                        const std::string& prefix = "") {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files = {dir / (prefix + "gap_vs_k.tsv"), dir / (prefix + "eta_vs_k.tsv"),
                                              dir / (prefix + "batch_vs_k.tsv"), dir / (prefix + "calls_vs_gap.tsv")};
  auto gap = detail::open_tsv(files[0]);
  auto eta = detail::open_tsv(files[1]);
  auto batch = detail::open_tsv(files[2]);
  auto calls = detail::open_tsv(files[3]);
  gap << "k\tgap\n";
  eta << "k\teta\n";
  batch << "k\tm\tn\n";
  calls << "calls_total\tgap\n";
  for (const auto& r : records) {
    gap << r.k << '\t' << detail::cell(r.gap) << '\n';
    eta << r.k << '\t' << fmt_double(r.eta) << '\n';
    batch << r.k << '\t' << r.m << '\t' << r.n << '\n';
    calls << r.calls_total << '\t' << detail::cell(r.gap) << '\n';
  }
  return files;
}

/// One column per label, rows keyed by k (nan where a label has no record).
inline std::vector<std::filesystem::path> emit_plotdata(const std::vector<LabeledSeries>& series,
                                                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::uint64_t, std::vector<const TrajectoryRecord*>> rows;
  for (std::size_t s = 0; s < series.size(); ++s)
    for (const auto& r : series[s].records) {
      auto& row = rows[r.k];
      row.resize(series.size(), nullptr);
      row[s] = &r;
    }
  for (auto& [k, row] : rows) row.resize(series.size(), nullptr);

  std::vector<std::filesystem::path> files = {dir / "gap_vs_k.tsv", dir / "eta_vs_k.tsv", dir / "batch_vs_k.tsv",
                                              dir / "calls_vs_gap.tsv"};
  auto gap = detail::open_tsv(files[0]);
  auto eta = detail::open_tsv(files[1]);
  auto batch = detail::open_tsv(files[2]);
  auto calls = detail::open_tsv(files[3]);
  gap << 'k';
  eta << 'k';
  batch << 'k';
  calls << 'k';
  for (const auto& s : series) {
    gap << '\t' << s.label;
    eta << '\t' << s.label;
    batch << '\t' << s.label << "_m\t" << s.label << "_n";
    calls << '\t' << s.label << "_calls\t" << s.label << "_gap";
  }
  gap << '\n';
  eta << '\n';
  batch << '\n';
  calls << '\n';
  for (const auto& [k, row] : rows) {
    gap << k;
    eta << k;
    batch << k;
    calls << k;
    for (const TrajectoryRecord* r : row) {
      gap << '\t' << (r ? detail::cell(r->gap) : "nan");
      eta << '\t' << (r ? fmt_double(r->eta) : "nan");
      batch << '\t' << (r ? std::to_string(r->m) : "nan") << '\t' << (r ? std::to_string(r->n) : "nan");
      calls << '\t' << (r ? std::to_string(r->calls_total) : "nan") << '\t' << (r ? detail::cell(r->gap) : "nan");
    }
    gap << '\n';
    eta << '\n';
    batch << '\n';
    calls << '\n';
  }
  return files;
}

/// Seed average per k over the runs that reached k (gap, eta, m, n, calls).
inline std::vector<TrajectoryRecord> average_over_seeds(const std::vector<std::vector<TrajectoryRecord>>& runs) {
  std::map<std::uint64_t, std::pair<TrajectoryRecord, std::size_t>> acc;
  std::map<std::uint64_t, double> m_sum, n_sum, calls_sum;
  for (const auto& run : runs)
    for (const auto& r : run) {
      auto& [a, count] = acc[r.k];
      a.k = r.k;
      if (r.gap) a.gap = a.gap.value_or(0.0) + *r.gap;
      a.eta += r.eta;
      m_sum[r.k] += static_cast<double>(r.m);
      n_sum[r.k] += static_cast<double>(r.n);
      calls_sum[r.k] += static_cast<double>(r.calls_total);
      ++count;
    }
  std::vector<TrajectoryRecord> out;
  for (auto& [k, entry] : acc) {
    auto& [a, count] = entry;
    const double c = static_cast<double>(count);
    if (a.gap) a.gap = *a.gap / c;
    a.eta /= c;
    a.m = static_cast<std::uint64_t>(std::llround(m_sum[k] / c));
    a.n = static_cast<std::uint64_t>(std::llround(n_sum[k] / c));
    a.calls_total = static_cast<std::uint64_t>(std::llround(calls_sum[k] / c));
    out.push_back(a);
  }
  return out;
}

}  // namespace sacfgm
