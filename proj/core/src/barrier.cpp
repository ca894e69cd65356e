#include "stencilwave/barrier.hpp"

#include <cassert>
#include <string>
#include <thread>

#include "stencilwave/error.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace stencilwave {

std::string_view to_string(BarrierKind kind) noexcept {
  return kind == BarrierKind::tree ? "tree" : "central";
}

BarrierKind parse_barrier_kind(std::string_view text) {
  if (text == "central" || text == "central-spin" || text == "spin")
    return BarrierKind::central_spin;
  if (text == "tree") return BarrierKind::tree;
  fail(ErrorCode::config, "unknown barrier kind '" + std::string(text) + "'");
}

BarrierKind default_barrier_kind(std::size_t threads,
                                 std::size_t physical_cores) noexcept {
  return threads <= physical_cores ? BarrierKind::central_spin
                                   : BarrierKind::tree;
}

SpinPolicy SpinPolicy::for_team(std::size_t team_size,
                                BarrierKind kind) noexcept {
  SpinPolicy p;
  p.max_backoff = kind == BarrierKind::tree ? 64 : 1;
  const auto hw = std::thread::hardware_concurrency();
  if (hw != 0 && team_size > hw) p.yield_after = 0;
  return p;
}

void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#elif defined(__aarch64__)
  asm volatile("yield" ::: "memory");
#endif
}

namespace {

template <typename Done>
void spin_until(Done done, const SpinPolicy& policy) {
  std::uint32_t backoff = 1;
  std::uint64_t spun = 0;
  while (!done()) {
    for (std::uint32_t b = 0; b < backoff; ++b) cpu_relax();
    spun += backoff;
    if (backoff < policy.max_backoff) backoff <<= 1;
    if (spun >= policy.yield_after) {
      std::this_thread::yield();
      spun = 0;
      backoff = 1;
    }
  }
}

int ceil_log2(std::size_t n) {
  int l = 0;
  while ((std::size_t{1} << l) < n) ++l;
  return l;
}

}  // namespace

Barrier::Barrier(std::size_t team_size, BarrierKind kind)
    : Barrier(team_size, kind, SpinPolicy::for_team(team_size, kind)) {}

Barrier::Barrier(std::size_t team_size, BarrierKind kind, SpinPolicy policy)
    : team_size_(team_size), kind_(kind), policy_(policy) {
  if (team_size == 0) fail(ErrorCode::config, "barrier team size must be >= 1");
  tree_levels_ = ceil_log2(team_size);
  // The per-rank epoch doubles as the duplicate-rank guard of the central form.
  local_epoch_ = std::make_unique<Slot[]>(team_size);
  if (kind == BarrierKind::tree) {
    arrive_ = std::make_unique<Slot[]>(team_size);
    release_ = std::make_unique<Slot[]>(team_size);
  }
}

Barrier::~Barrier() = default;

int Barrier::levels() const noexcept {
  if (kind_ == BarrierKind::tree) return tree_levels_;
  return team_size_ > 1 ? 1 : 0;
}

std::uint64_t Barrier::wait(std::size_t rank) {
  if (rank >= team_size_) {
    fail(ErrorCode::bounds, "barrier rank " + std::to_string(rank) +
                                " outside team of " + std::to_string(team_size_));
  }
  return kind_ == BarrierKind::tree ? wait_tree(rank) : wait_central(rank);
}

std::uint64_t Barrier::wait_central(std::size_t rank) {
  const std::uint64_t epoch = epoch_.value.load(std::memory_order_acquire);
#ifndef NDEBUG
  // A second arrival of the same rank in one phase would find its private
  // epoch already advanced.
  assert(local_epoch_[rank].value.load(std::memory_order_relaxed) == epoch);
#endif
  local_epoch_[rank].value.store(epoch + 1, std::memory_order_relaxed);
  if (arrived_.value.fetch_add(1, std::memory_order_acq_rel) + 1 == team_size_) {
    arrived_.value.store(0, std::memory_order_relaxed);
    epoch_.value.store(epoch + 1, std::memory_order_release);
  } else {
    spin_until(
        [&] { return epoch_.value.load(std::memory_order_acquire) != epoch; },
        policy_);
  }
  return epoch;
}

// Static tournament: at level l, rank r with bit l set reports to r - 2^l and
// drops out; the others collect their partner r + 2^l. Rank 0 wins the final
// and starts the release, which every winner forwards to the partners it
// collected, largest subtree first.
std::uint64_t Barrier::wait_tree(std::size_t rank) {
  const std::uint64_t epoch =
      local_epoch_[rank].value.load(std::memory_order_relaxed);
  const std::uint64_t target = epoch + 1;

  int won_levels = tree_levels_;
  for (int l = 0; l < tree_levels_; ++l) {
    const std::size_t bit = std::size_t{1} << l;
    if ((rank & bit) != 0) {
      arrive_[rank].value.store(target, std::memory_order_release);
      spin_until(
          [&] {
            return release_[rank].value.load(std::memory_order_acquire) >=
                   target;
          },
          policy_);
      won_levels = l;
      break;
    }
    const std::size_t partner = rank | bit;
    if (partner < team_size_) {
      spin_until(
          [&] {
            return arrive_[partner].value.load(std::memory_order_acquire) >=
                   target;
          },
          policy_);
    }
  }

  for (int l = won_levels - 1; l >= 0; --l) {
    const std::size_t child = rank | (std::size_t{1} << l);
    if (child < team_size_)
      release_[child].value.store(target, std::memory_order_release);
  }
  local_epoch_[rank].value.store(target, std::memory_order_relaxed);
  return epoch;
}

}  // namespace stencilwave
