#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "stencilwave/error.hpp"
#include "stencilwave/sweeps.hpp"
#include "stencilwave/thread_team.hpp"

namespace stencilwave::detail {

/// Validates `plan` as if its variant field named `variant`, for engines
/// called directly.
inline void validate_as(const SweepPlan& plan, const Grid3D& g,
                        Variant variant) {
  if (plan.variant == variant) {
    validate_plan(plan, g);
  } else {
    SweepPlan copy = plan;
    copy.variant = variant;
    validate_plan(copy, g);
  }
}

inline void gs_update(KernelKind kind, double* center, const double* south,
                      const double* north, const double* below,
                      const double* above, Index n, double b) noexcept {
  if (kind == KernelKind::gs_interleaved)
    gs_line_interleaved(center, south, north, below, above, n, b);
  else
    gs_line(center, south, north, below, above, n, b);
}

inline void jacobi_update(bool nt, const double* center, const double* south,
                          const double* north, const double* below,
                          const double* above, double* out, Index n,
                          StencilCoeffs c) noexcept {
  if (nt)
    jacobi_line_stream(center, south, north, below, above, out, n, c);
  else
    jacobi_line(center, south, north, below, above, out, n, c);
}

/// One atomic tag per stored line, for instrumented runs. Readers compare
/// the tag against the level they expect and count mismatches.
class LineTags {
 public:
  LineTags() = default;
  LineTags(std::size_t count, std::int64_t initial)
      : tags_(std::make_unique<std::atomic<std::int64_t>[]>(count)),
        count_(count) {
    for (std::size_t i = 0; i < count; ++i)
      tags_[i].store(initial, std::memory_order_relaxed);
  }

  bool enabled() const noexcept { return count_ != 0; }

  void set(std::size_t i, std::int64_t tag) noexcept {
    tags_[i].store(tag, std::memory_order_release);
  }
  std::int64_t get(std::size_t i) const noexcept {
    return tags_[i].load(std::memory_order_acquire);
  }
  bool check(std::size_t i, std::int64_t expected,
             std::atomic<std::uint64_t>& violations) const noexcept {
    if (get(i) == expected) return true;
    violations.fetch_add(1, std::memory_order_relaxed);
    return false;
  }

 private:
  std::unique_ptr<std::atomic<std::int64_t>[]> tags_;
  std::size_t count_ = 0;
};

/// Instrumented runs give up the time slice after every line so that team
/// members interleave finely even on few cores, which exposes ordering bugs
/// that coarse scheduling would hide.
inline void shake(bool instrument) noexcept {
  if (!instrument) return;
  thread_local std::minstd_rand rng(
      static_cast<unsigned>(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  for (auto n = rng() % 4; n > 0; --n) std::this_thread::yield();
}

/// Tag index of interior line (k, j); -1 for halo lines, which never change.
inline std::ptrdiff_t line_tag_index(const Grid3D& g, Index k, Index j) noexcept {
  if (k < 0 || k >= g.nk() || j < 0 || j >= g.nj()) return -1;
  return k * g.nj() + j;
}

/// Block geometry shared by the wavefront engines. Level r (1..t) of block b
/// covers lines [lo(b, r), hi(b, r)): the block boundaries shift down by one
/// line per level, so every level of a block only needs lines of the level
/// below that the same block has already produced, plus lines of the
/// preceding block.
struct WavefrontLayout {
  std::vector<Range> blocks;
  int groups = 1;
  int depth = 1;
  Index nj = 0;

  WavefrontLayout(const WavefrontConfig& w, Index nj_)
      : blocks(partition_blocks(nj_, w.blocks)),
        groups(w.num_groups),
        depth(w.threads_per_group),
        nj(nj_) {}

  int count() const noexcept { return static_cast<int>(blocks.size()); }
  Index start(int b) const noexcept { return blocks[static_cast<std::size_t>(b)].begin; }
  Index lo(int b, int r) const noexcept {
    return b == 0 ? 0 : std::max<Index>(0, start(b) - r + 1);
  }
  Index hi(int b, int r) const noexcept {
    return b == count() - 1 ? nj : std::max<Index>(0, start(b + 1) - r + 1);
  }
  int passes() const noexcept { return (count() + groups - 1) / groups; }
  int active_groups(int pass) const noexcept {
    return std::min(groups, count() - pass * groups);
  }
  Index max_block() const noexcept {
    Index m = 0;
    for (const auto& r : blocks) m = std::max(m, r.size());
    return m;
  }
};

/// Warning text when a group's working set exceeds the cache budget of the
/// host's outermost cache; empty when it fits or the size is unknown.
std::string cache_fit_warning(const WavefrontConfig& w, const Grid3D& g);

/// Shared bookkeeping of one team run.
struct TeamCounters {
  std::atomic<std::uint64_t> line_updates{0};
  std::atomic<std::uint64_t> violations{0};
  std::uint64_t barrier_phases = 0;
};

inline void reset_stats(SweepStats* stats, int team_size) {
  if (!stats) return;
  *stats = SweepStats{};
  stats->team_size = team_size;
}

inline void fill_stats(SweepStats* stats, const TeamCounters& counters,
                       int team_size, TeamReport report) {
  if (!stats) return;
  stats->line_updates = counters.line_updates.load();
  stats->violations = counters.violations.load();
  stats->barrier_phases = counters.barrier_phases;
  stats->team_size = team_size;
  stats->pinned = report.pinned;
  for (auto& w : report.warnings) stats->warnings.push_back(std::move(w));
}

}  // namespace stencilwave::detail
