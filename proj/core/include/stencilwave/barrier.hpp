#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

namespace stencilwave {

enum class BarrierKind { central_spin, tree };

std::string_view to_string(BarrierKind kind) noexcept;
BarrierKind parse_barrier_kind(std::string_view text);

/// Central spin for teams that fit on physical cores, tree once SMT
/// siblings share a core.
BarrierKind default_barrier_kind(std::size_t threads,
                                 std::size_t physical_cores) noexcept;

/// How long a waiter spins on pause hints before handing its time slice
/// back with a yield. Waiters never sleep in the kernel.
struct SpinPolicy {
  std::uint32_t max_backoff = 1;   // pause hints per probe, doubled up to this
  std::uint64_t yield_after = 1u << 14;  // pause hints between yields

  /// Yield almost immediately when the team outnumbers hardware threads;
  /// spinning there only delays the thread everybody is waiting for.
  static SpinPolicy for_team(std::size_t team_size, BarrierKind kind) noexcept;
};

void cpu_relax() noexcept;

/// Reusable phase barrier for a fixed team. Every rank in [0, team_size)
/// calls wait() exactly once per phase; wait() returns the index of the
/// phase it completed (0, 1, 2, ...), identical across ranks. Each wait is a
/// full acquire/release ordering point across the team.
class Barrier {
 public:
  Barrier(std::size_t team_size, BarrierKind kind);
  Barrier(std::size_t team_size, BarrierKind kind, SpinPolicy policy);
  ~Barrier();

  Barrier(const Barrier&) = delete;
  Barrier& operator=(const Barrier&) = delete;

  std::uint64_t wait(std::size_t rank);

  std::size_t team_size() const noexcept { return team_size_; }
  BarrierKind kind() const noexcept { return kind_; }
  /// Combining levels of the tree form, ceil(log2 T); 1 for central spin
  /// (0 for a single participant).
  int levels() const noexcept;

 private:
  struct alignas(64) Slot {
    std::atomic<std::uint64_t> value{0};
  };

  std::uint64_t wait_central(std::size_t rank);
  std::uint64_t wait_tree(std::size_t rank);

  std::size_t team_size_;
  BarrierKind kind_;
  SpinPolicy policy_;
  int tree_levels_ = 0;

  // central spin
  Slot arrived_;
  Slot epoch_;

  // tree: per-rank arrival flag, release flag and private epoch
  std::unique_ptr<Slot[]> arrive_;
  std::unique_ptr<Slot[]> release_;
  std::unique_ptr<Slot[]> local_epoch_;
};

}  // namespace stencilwave
