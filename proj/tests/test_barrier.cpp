#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

#include "stencilwave/barrier.hpp"
#include "stencilwave/error.hpp"

namespace sw = stencilwave;

namespace {

// Kills the process if the guarded scope does not finish in time; a
// deadlocked barrier would otherwise hang the test run.
class Watchdog {
 public:
  explicit Watchdog(std::chrono::seconds limit) {
    thread_ = std::thread([this, limit] {
      std::unique_lock lock(mutex_);
      if (!cv_.wait_for(lock, limit, [this] { return done_; })) {
        std::fprintf(stderr, "watchdog: barrier stress did not finish\n");
        std::_Exit(3);
      }
    });
  }
  ~Watchdog() {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    cv_.notify_one();
    thread_.join();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread thread_;
};

struct StressResult {
  bool phases_match = true;
  bool writes_visible = true;
};

StressResult stress(std::size_t team, sw::BarrierKind kind, std::uint64_t phases) {
  sw::Barrier barrier(team, kind);
  // Two slot banks: bank p % 2 is written before phase p and read after it;
  // it is next written only after phase p + 1, when every reader is done.
  std::vector<std::atomic<std::uint64_t>> slots(2 * team);
  for (auto& s : slots) s.store(~0ull);
  std::atomic<bool> phases_match{true}, visible{true};
  std::vector<std::thread> threads;
  for (std::size_t r = 0; r < team; ++r) {
    threads.emplace_back([&, r] {
      for (std::uint64_t p = 0; p < phases; ++p) {
        auto* bank = &slots[(p % 2) * team];
        bank[r].store(p, std::memory_order_relaxed);
        if (barrier.wait(r) != p) phases_match = false;
        for (std::size_t q = 0; q < team; ++q)
          if (bank[q].load(std::memory_order_relaxed) != p) visible = false;
      }
    });
  }
  for (auto& t : threads) t.join();
  return {phases_match.load(), visible.load()};
}

}  // namespace

TEST(Barrier, SingleParticipantCountsPhases) {
  for (auto kind : {sw::BarrierKind::central_spin, sw::BarrierKind::tree}) {
    sw::Barrier b(1, kind);
    for (std::uint64_t p = 0; p < 5; ++p) EXPECT_EQ(b.wait(0), p);
  }
}

TEST(Barrier, TreeLevels) {
  EXPECT_EQ(sw::Barrier(1, sw::BarrierKind::tree).levels(), 0);
  EXPECT_EQ(sw::Barrier(2, sw::BarrierKind::tree).levels(), 1);
  EXPECT_EQ(sw::Barrier(4, sw::BarrierKind::tree).levels(), 2);
  EXPECT_EQ(sw::Barrier(5, sw::BarrierKind::tree).levels(), 3);
  EXPECT_EQ(sw::Barrier(8, sw::BarrierKind::tree).levels(), 3);
  EXPECT_EQ(sw::Barrier(4, sw::BarrierKind::central_spin).levels(), 1);
}

TEST(Barrier, EmptyTeamIsConfigError) {
  for (auto kind : {sw::BarrierKind::central_spin, sw::BarrierKind::tree}) {
    try {
      sw::Barrier b(0, kind);
      FAIL();
    } catch (const sw::Error& e) {
      EXPECT_EQ(e.code(), sw::ErrorCode::config);
    }
  }
}

TEST(Barrier, RankOutsideTeam) {
  sw::Barrier b(2, sw::BarrierKind::central_spin);
  EXPECT_THROW(b.wait(2), sw::Error);
}

TEST(Barrier, KindNamesAndDefault) {
  EXPECT_EQ(sw::parse_barrier_kind("tree"), sw::BarrierKind::tree);
  EXPECT_EQ(sw::parse_barrier_kind("central"), sw::BarrierKind::central_spin);
  EXPECT_EQ(sw::parse_barrier_kind(sw::to_string(sw::BarrierKind::tree)),
            sw::BarrierKind::tree);
  EXPECT_THROW(sw::parse_barrier_kind("futex"), sw::Error);
  EXPECT_EQ(sw::default_barrier_kind(4, 4), sw::BarrierKind::central_spin);
  EXPECT_EQ(sw::default_barrier_kind(8, 4), sw::BarrierKind::tree);
}

TEST(Barrier, SpinPolicyBacksOffForTree) {
  EXPECT_GT(sw::SpinPolicy::for_team(2, sw::BarrierKind::tree).max_backoff, 1u);
  const auto hw = std::thread::hardware_concurrency();
  if (hw > 0) {
    EXPECT_EQ(sw::SpinPolicy::for_team(hw + 1, sw::BarrierKind::central_spin).yield_after,
              0u);
  }
}

class BarrierStress
    : public ::testing::TestWithParam<std::tuple<sw::BarrierKind, std::size_t>> {};

TEST_P(BarrierStress, PhasesAgreeAndWritesAreVisible) {
  const auto [kind, team] = GetParam();
  Watchdog dog(std::chrono::seconds(60));
  const auto r = stress(team, kind, 100000);
  EXPECT_TRUE(r.phases_match);
  EXPECT_TRUE(r.writes_visible);
}

INSTANTIATE_TEST_SUITE_P(
    Teams, BarrierStress,
    ::testing::Combine(::testing::Values(sw::BarrierKind::central_spin,
                                         sw::BarrierKind::tree),
                       ::testing::Values(std::size_t{2}, std::size_t{3},
                                         std::size_t{4}, std::size_t{8})));
