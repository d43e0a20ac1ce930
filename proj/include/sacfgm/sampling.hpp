#pragma once

// Keyed, counter-based sampling streams. Each (seed, kind, iteration) pair
// owns its own substream so adaptive batch sizes never shift another
// stream's draws.

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sacfgm/errors.hpp"
#include "sacfgm/problem.hpp"

namespace sacfgm {

enum class StreamKind : std::uint8_t {
  MainUpdate = 0,   // xi
  StepGradDiff,     // xi-bar
  StepTaylor,       // xi-hat
  VarMain,          // xi^b
  VarGradDiff,      // xi-bar^b
  VarTaylor,        // xi-hat^b
};

inline constexpr std::array<StreamKind, 6> kAllStreams = {StreamKind::MainUpdate,  StreamKind::StepGradDiff,
                                                          StreamKind::StepTaylor,  StreamKind::VarMain,
                                                          StreamKind::VarGradDiff, StreamKind::VarTaylor};

inline const char* stream_name(StreamKind k) {
  switch (k) {
    case StreamKind::MainUpdate: return "main";
    case StreamKind::StepGradDiff: return "step_grad_diff";
    case StreamKind::StepTaylor: return "step_taylor";
    case StreamKind::VarMain: return "var_main";
    case StreamKind::VarGradDiff: return "var_grad_diff";
    case StreamKind::VarTaylor: return "var_taylor";
  }
  return "?";
}

/// Position of a stream inside one iteration: 0 before the stepsize batches,
/// 1 for the gradient-difference batches, 2 for the Taylor batches.
inline int stream_stage(StreamKind k) {
  switch (k) {
    case StreamKind::MainUpdate:
    case StreamKind::VarMain: return 0;
    case StreamKind::StepGradDiff:
    case StreamKind::VarGradDiff: return 1;
    case StreamKind::StepTaylor:
    case StreamKind::VarTaylor: return 2;
  }
  return 0;
}

inline bool is_variance_stream(StreamKind k) {
  return k == StreamKind::VarMain || k == StreamKind::VarGradDiff || k == StreamKind::VarTaylor;
}

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_key(std::uint64_t seed, StreamKind kind, std::uint64_t iteration) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (0xA0761D6478BD642FULL * (static_cast<std::uint64_t>(kind) + 1)));
  return splitmix64(k ^ (0xE7037ED1A0B428DBULL * (iteration + 1)));
}

// Lemire multiply-shift: uniform in [0, m) up to 2^-64 bias.
inline std::uint32_t to_range(std::uint64_t r, std::uint64_t m) {
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(r) * m) >> 64);
}

}  // namespace detail

/// Index drawn at `position` of the (seed, kind, iteration) substream.
inline ComponentIndex stream_index(std::uint64_t seed, StreamKind kind, std::uint64_t iteration,
                                   std::uint64_t position, std::uint64_t m) {
  const std::uint64_t key = detail::stream_key(seed, kind, iteration);
  return detail::to_range(detail::splitmix64(key + 0x9E3779B97F4A7C15ULL * position), m);
}

struct BatchDraw {
  StreamKind kind = StreamKind::MainUpdate;
  std::uint64_t iteration = 0;
  std::vector<ComponentIndex> indices;

  std::size_t size() const { return indices.size(); }
};

struct FiltrationEntry {
  std::uint64_t iteration = 0;
  StreamKind kind = StreamKind::MainUpdate;
  std::uint64_t size = 0;
  std::uint64_t cumulative_calls = 0;
};

/// Ordered record of every batch revealed during a run plus per-stream call counters.
class FiltrationLog {
 public:
  void append(std::uint64_t iteration, StreamKind kind, std::uint64_t size) {
    total_ += size;
    per_kind_[static_cast<std::size_t>(kind)] += size;
    entries_.push_back({iteration, kind, size, total_});
  }

  const std::vector<FiltrationEntry>& entries() const { return entries_; }
  std::uint64_t total_calls() const { return total_; }
  std::uint64_t calls(StreamKind k) const { return per_kind_[static_cast<std::size_t>(k)]; }

  // Test hook: corrupt the counter to exercise the audit.
  void force_total_for_testing(std::uint64_t t) { total_ = t; }

  void write_csv(std::ostream& out) const {
    out << "iteration,kind,size,cumulative_calls\n";
    for (const auto& e : entries_)
      out << e.iteration << ',' << stream_name(e.kind) << ',' << e.size << ',' << e.cumulative_calls << '\n';
  }

  friend bool operator==(const FiltrationLog& a, const FiltrationLog& b) {
    if (a.total_ != b.total_ || a.per_kind_ != b.per_kind_ || a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.iteration != y.iteration || x.kind != y.kind || x.size != y.size ||
          x.cumulative_calls != y.cumulative_calls)
        return false;
    }
    return true;
  }

 private:
  std::vector<FiltrationEntry> entries_;
  std::array<std::uint64_t, 6> per_kind_{};
  std::uint64_t total_ = 0;
};

/// Draw `size` i.i.d. uniform indices in [0, m) from the keyed substream and
/// append the batch to `log` when given.
inline BatchDraw draw_batch(std::uint64_t seed, StreamKind kind, std::uint64_t iteration, std::uint64_t size,
                            std::uint64_t m, FiltrationLog* log = nullptr) {
  require(size >= 1, "draw_batch requires size >= 1");
  require(m >= 1, "draw_batch requires at least one component");
  BatchDraw b;
  b.kind = kind;
  b.iteration = iteration;
  b.indices.resize(size);
  const std::uint64_t key = detail::stream_key(seed, kind, iteration);
  for (std::uint64_t j = 0; j < size; ++j)
    b.indices[j] = detail::to_range(detail::splitmix64(key + 0x9E3779B97F4A7C15ULL * j), m);
  if (log) log->append(iteration, kind, size);
  return b;
}

struct AuditResult {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Check ordering (iterations nondecreasing; within an iteration, stages
/// nondecreasing), single use of each (iteration, kind), matching step-batch
/// sizes, and the counter identity total = sum of batch sizes.
inline AuditResult audit_filtration(const FiltrationLog& log) {
  AuditResult r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.violations.push_back(std::move(msg));
  };
  std::uint64_t cur_iter = 0;
  int cur_stage = -1;
  std::array<bool, 6> seen{};
  std::uint64_t grad_diff_size = 0;
  std::uint64_t taylor_size = 0;
  std::uint64_t running = 0;
  auto close_iteration = [&](std::uint64_t it) {
    if (grad_diff_size != taylor_size && grad_diff_size != 0 && taylor_size != 0)
      fail("iteration " + std::to_string(it) + ": step batches differ in size (" + std::to_string(grad_diff_size) +
           " vs " + std::to_string(taylor_size) + ")");
    if ((grad_diff_size == 0) != (taylor_size == 0))
      fail("iteration " + std::to_string(it) + ": only one of the two step batches was drawn");
  };
  for (std::size_t i = 0; i < log.entries().size(); ++i) {
    const auto& e = log.entries()[i];
    const std::string where = "entry " + std::to_string(i) + " (iteration " + std::to_string(e.iteration) + ", " +
                              stream_name(e.kind) + ")";
    if (i == 0 || e.iteration != cur_iter) {
      if (i > 0) {
        close_iteration(cur_iter);
        if (e.iteration < cur_iter) fail(where + ": iteration went backwards");
      }
      cur_iter = e.iteration;
      cur_stage = -1;
      seen = {};
      grad_diff_size = taylor_size = 0;
    }
    const int stage = stream_stage(e.kind);
    if (stage < cur_stage) fail(where + ": revealed after a later-stage batch of the same iteration");
    cur_stage = std::max(cur_stage, stage);
    auto& flag = seen[static_cast<std::size_t>(e.kind)];
    if (flag) fail(where + ": stream reused within the iteration");
    flag = true;
    if (e.size == 0) fail(where + ": empty batch");
    if (e.kind == StreamKind::StepGradDiff) grad_diff_size = e.size;
    if (e.kind == StreamKind::StepTaylor) taylor_size = e.size;
    running += e.size;
    if (e.cumulative_calls != running) fail(where + ": cumulative counter mismatch");
  }
  if (!log.entries().empty()) close_iteration(cur_iter);
  if (running != log.total_calls())
    fail("counter total " + std::to_string(log.total_calls()) + " != sum of batch sizes " + std::to_string(running));
  std::uint64_t by_kind = 0;
  for (auto k : kAllStreams) by_kind += log.calls(k);
  if (by_kind != log.total_calls()) fail("per-stream counters do not add up to the total");
  return r;
}

}  // namespace sacfgm
