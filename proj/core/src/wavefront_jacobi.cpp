#include <algorithm>
#include <array>
#include <cstring>

#include "sweep_detail.hpp"

namespace stencilwave {

namespace {

// Storage of intermediate levels within one round of t sweeps:
//   level 0 and even levels    the grid itself, updated in place
//   odd levels below t         4-plane ring per level in the group buffer
//   level t when t is odd      2-plane ring, copied into the grid one plane
//                              behind the computation
// Rank q of group g computes level q + 1 of plane s - 2q - g at stage s.
// Lines of the preceding block that a block reads at level l are copied out
// by that block into a small interface buffer while it computes them.
class JacobiWavefront {
 public:
  JacobiWavefront(const SweepPlan& plan, Grid3D& grid)
      : plan_(plan),
        g_(grid),
        layout_(plan.wavefront, grid.nj()),
        t_(plan.wavefront.threads_per_group),
        ni_(grid.ni()),
        nj_(grid.nj()),
        nk_(grid.nk()),
        row_(grid.ni() + 2),
        ring_lines_(layout_.max_block() + t_ - 1),
        iface_slots_(std::min(layout_.count(), 2 * layout_.groups)) {
    const int groups = layout_.groups;
    rings_.resize(static_cast<std::size_t>(groups));
    for (auto& ring : rings_)
      ring.assign(static_cast<std::size_t>(2 * t_ * ring_lines_ * row_), 0.0);
    iface_.assign(static_cast<std::size_t>(iface_slots_ * t_ * nk_ * 2 * row_), 0.0);
    if (plan.instrument) {
      src_tags_ = detail::LineTags(static_cast<std::size_t>(nk_ * nj_), 0);
      for (int i = 0; i < groups; ++i)
        ring_tags_.emplace_back(static_cast<std::size_t>(2 * t_ * ring_lines_), -1);
      iface_tags_ = detail::LineTags(
          static_cast<std::size_t>(iface_slots_ * t_ * nk_ * 2), -1);
    }
  }

  void member(std::size_t rank, detail::TeamCounters& counters, Barrier& barrier) {
    const int grp = static_cast<int>(rank) / t_;
    const int q = static_cast<int>(rank) % t_;
    const int r = q + 1;
    const bool copy_back = r == t_ && t_ % 2 == 1;
    std::uint64_t updates = 0;
    std::uint64_t phases = 0;
    const int rounds = plan_.iterations / t_;
    for (int round = 0; round < rounds; ++round) {
      const std::int64_t base = static_cast<std::int64_t>(round) * t_;
      for (int pass = 0; pass < layout_.passes(); ++pass) {
        const int active = layout_.active_groups(pass);
        const Index stages =
            nk_ + 2 * (t_ - 1) + (active - 1) + (t_ % 2 == 1 ? 1 : 0);
        const int b = pass * layout_.groups + grp;
        const bool busy = grp < active;
        for (Index s = 0; s < stages; ++s) {
          const Index k = s - 2 * q - grp;
          if (busy && k >= 0 && k < nk_) {
            detail::shake(plan_.instrument);
            if (q == 0 && b + 1 < layout_.count())
              save_level0(b + 1, k, base, counters);
            updates += compute(b, grp, r, k, base, counters);
          }
          if (busy && copy_back && k - 1 >= 0 && k - 1 < nk_)
            write_back(b, grp, k - 1, base);
          if (plan_.nt_stores) stream_fence();
          barrier.wait(rank);
          ++phases;
        }
      }
    }
    counters.line_updates.fetch_add(updates, std::memory_order_relaxed);
    if (rank == 0) counters.barrier_phases = phases;
  }

 private:
  enum class Store { grid, ring, iface };

  struct Loc {
    Store store;
    double* ptr;
    std::size_t tag;
    bool tagged;
  };

  Index ring_j0(int b) const noexcept { return layout_.lo(b, t_); }

  int ring_slot(int level, Index k) const noexcept {
    if (level == t_ && t_ % 2 == 1) return 2 * (t_ - 1) + static_cast<int>(k % 2);
    return 2 * (level - 1) + static_cast<int>(k % 4);
  }

  double* ring_line(int grp, int slot, Index line) noexcept {
    return rings_[static_cast<std::size_t>(grp)].data() +
           (static_cast<Index>(slot) * ring_lines_ + line) * row_ + 1;
  }

  // Interface buffer of block b at level l holds lines start(b) - l - 1 and
  // start(b) - l.
  std::size_t iface_index(int b, int level, Index k, Index j) const noexcept {
    const Index slot = b % iface_slots_;
    const Index idx = j - (layout_.start(b) - level - 1);
    return static_cast<std::size_t>(((slot * t_ + level) * nk_ + k) * 2 + idx);
  }
  double* iface_line(std::size_t index) noexcept {
    return iface_.data() + static_cast<Index>(index) * row_ + 1;
  }

  bool in_ring(int level) const noexcept {
    return level % 2 == 1;
  }

  Loc locate(int b, int grp, int level, Index k, Index j) noexcept {
    if (k < 0 || k >= nk_ || j < 0 || j >= nj_)
      return {Store::grid, g_.line(k, j), 0, false};
    const Index own_from = level == 0 ? layout_.start(b) : layout_.lo(b, level);
    if (j < own_from) {
      const auto idx = iface_index(b, level, k, j);
      return {Store::iface, iface_line(idx), idx, true};
    }
    const auto grid_tag = static_cast<std::size_t>(k * nj_ + j);
    if (level == 0 || !in_ring(level))
      return {Store::grid, g_.line(k, j), grid_tag, true};
    const int slot = ring_slot(level, k);
    const Index line = j - ring_j0(b);
    return {Store::ring, ring_line(grp, slot, line),
            static_cast<std::size_t>(slot * ring_lines_ + line), true};
  }

  std::int64_t ring_tag(std::int64_t abs_level, int b, Index k) const noexcept {
    return (abs_level * layout_.count() + b) * nk_ + k;
  }
  std::int64_t iface_tag(std::int64_t abs_level, int b) const noexcept {
    return abs_level * layout_.count() + b;
  }

  void check(const Loc& loc, int b, int grp, std::int64_t abs_level, Index k,
             detail::TeamCounters& counters) const noexcept {
    if (!loc.tagged) return;
    switch (loc.store) {
      case Store::grid: src_tags_.check(loc.tag, abs_level, counters.violations); break;
      case Store::ring:
        ring_tags_[static_cast<std::size_t>(grp)].check(
            loc.tag, ring_tag(abs_level, b, k), counters.violations);
        break;
      case Store::iface:
        iface_tags_.check(loc.tag, iface_tag(abs_level, b), counters.violations);
        break;
    }
  }

  void save_level0(int next, Index k, std::int64_t base,
                   detail::TeamCounters& counters) noexcept {
    const Index j = layout_.start(next) - 1;
    const auto idx = iface_index(next, 0, k, j);
    if (plan_.instrument)
      src_tags_.check(static_cast<std::size_t>(k * nj_ + j), base, counters.violations);
    std::memcpy(iface_line(idx) - 1, g_.line(k, j) - 1,
                static_cast<std::size_t>(row_) * sizeof(double));
    if (plan_.instrument) iface_tags_.set(idx, iface_tag(base, next));
    detail::shake(plan_.instrument);
  }

  std::uint64_t compute(int b, int grp, int r, Index k, std::int64_t base,
                        detail::TeamCounters& counters) noexcept {
    const Index j0 = layout_.lo(b, r), j1 = layout_.hi(b, r);
    const int below = r - 1;
    const std::int64_t want = base + below;
    const bool to_grid = !in_ring(r);
    const bool next = b + 1 < layout_.count() && r < t_;
    const Index save_from = next ? layout_.start(b + 1) - r - 1 : 0;
    const Index save_to = next ? layout_.start(b + 1) - r + 1 : 0;
    for (Index j = j0; j < j1; ++j) {
      detail::shake(plan_.instrument);
      const Loc c = locate(b, grp, below, k, j);
      const Loc s = locate(b, grp, below, k, j - 1);
      const Loc n = locate(b, grp, below, k, j + 1);
      const Loc d = locate(b, grp, below, k - 1, j);
      const Loc u = locate(b, grp, below, k + 1, j);
      if (plan_.instrument) {
        check(c, b, grp, want, k, counters);
        check(s, b, grp, want, k, counters);
        check(n, b, grp, want, k, counters);
        check(d, b, grp, want, k - 1, counters);
        check(u, b, grp, want, k + 1, counters);
      }
      double* out;
      if (to_grid) {
        out = g_.line(k, j);
      } else {
        const int slot = ring_slot(r, k);
        out = ring_line(grp, slot, j - ring_j0(b));
        out[-1] = g_.line(k, j)[-1];
        out[ni_] = g_.line(k, j)[ni_];
      }
      detail::jacobi_update(plan_.nt_stores && to_grid, c.ptr, s.ptr, n.ptr,
                            d.ptr, u.ptr, out, ni_, plan_.coeffs);
      if (plan_.instrument) {
        if (to_grid)
          src_tags_.set(static_cast<std::size_t>(k * nj_ + j), base + r);
        else
          ring_tags_[static_cast<std::size_t>(grp)].set(
              static_cast<std::size_t>(ring_slot(r, k) * ring_lines_ + j - ring_j0(b)),
              ring_tag(base + r, b, k));
      }
      if (next && j >= save_from && j < save_to) {
        const auto idx = iface_index(b + 1, r, k, j);
        std::memcpy(iface_line(idx) - 1, out - 1,
                    static_cast<std::size_t>(row_) * sizeof(double));
        if (plan_.instrument) iface_tags_.set(idx, iface_tag(base + r, b + 1));
      }
    }
    return static_cast<std::uint64_t>(j1 - j0);
  }

  void write_back(int b, int grp, Index k, std::int64_t base) noexcept {
    const int slot = ring_slot(t_, k);
    for (Index j = layout_.lo(b, t_); j < layout_.hi(b, t_); ++j) {
      std::memcpy(g_.line(k, j), ring_line(grp, slot, j - ring_j0(b)),
                  static_cast<std::size_t>(ni_) * sizeof(double));
      if (plan_.instrument)
        src_tags_.set(static_cast<std::size_t>(k * nj_ + j), base + t_);
    }
  }

  const SweepPlan& plan_;
  Grid3D& g_;
  detail::WavefrontLayout layout_;
  int t_;
  Index ni_, nj_, nk_, row_;
  Index ring_lines_;
  int iface_slots_;
  std::vector<std::vector<double>> rings_;
  std::vector<double> iface_;
  detail::LineTags src_tags_;
  std::vector<detail::LineTags> ring_tags_;
  detail::LineTags iface_tags_;
};

}  // namespace

Grid3D run_wavefront_jacobi(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  detail::validate_as(plan, g, Variant::wavefront);
  if (plan.kernel != KernelKind::jacobi)
    fail(ErrorCode::plan, "run_wavefront_jacobi needs the Jacobi kernel");
  const int T = plan.wavefront.total_threads();
  if (plan.iterations == 0) {
    detail::reset_stats(stats, T);
    return g;
  }

  JacobiWavefront engine(plan, g);
  Barrier barrier(static_cast<std::size_t>(T), plan.wavefront.barrier);
  detail::TeamCounters counters;
  auto report = run_team(static_cast<std::size_t>(T), plan.pinning,
                         [&](std::size_t rank) { engine.member(rank, counters, barrier); });
  if (auto w = detail::cache_fit_warning(plan.wavefront, g); !w.empty())
    report.warnings.push_back(std::move(w));
  detail::fill_stats(stats, counters, T, std::move(report));
  return g;
}

}  // namespace stencilwave
