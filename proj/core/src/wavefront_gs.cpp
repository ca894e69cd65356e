#include <array>

#include "sweep_detail.hpp"

namespace stencilwave {

// Rank q of group g runs iteration level q + 1 of its block on plane
// s - 2q - g at stage s. Two planes between levels keep a rank from writing
// the plane its successor reads; one plane between groups suffices because
// the next block only touches lines above the skewed boundary.
Grid3D run_wavefront_gs(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  detail::validate_as(plan, g, Variant::wavefront);
  if (plan.kernel == KernelKind::jacobi)
    fail(ErrorCode::plan, "run_wavefront_gs needs a Gauss-Seidel kernel");
  const auto& w = plan.wavefront;
  const int t = w.threads_per_group;
  const int T = w.total_threads();
  if (plan.iterations == 0) {
    detail::reset_stats(stats, T);
    return g;
  }

  const Index ni = g.ni(), nk = g.nk();
  const detail::WavefrontLayout layout(w, g.nj());
  const int rounds = plan.iterations / t;

  detail::LineTags tags;
  if (plan.instrument)
    tags = detail::LineTags(static_cast<std::size_t>(nk * g.nj()), 0);

  Barrier barrier(static_cast<std::size_t>(T), w.barrier);
  detail::TeamCounters counters;

  auto report = run_team(static_cast<std::size_t>(T), plan.pinning,
                         [&](std::size_t rank) {
    const int grp = static_cast<int>(rank) / t;
    const int q = static_cast<int>(rank) % t;
    const int r = q + 1;
    std::uint64_t updates = 0;
    std::uint64_t phases = 0;
    for (int round = 0; round < rounds; ++round) {
      const std::int64_t level = static_cast<std::int64_t>(round) * t + r;
      for (int pass = 0; pass < layout.passes(); ++pass) {
        const int active = layout.active_groups(pass);
        const Index stages = nk + 2 * (t - 1) + (active - 1);
        const int b = pass * layout.groups + grp;
        const Index j0 = grp < active ? layout.lo(b, r) : 0;
        const Index j1 = grp < active ? layout.hi(b, r) : 0;
        for (Index s = 0; s < stages; ++s) {
          const Index k = s - 2 * q - grp;
          if (grp < active && k >= 0 && k < nk) {
            for (Index j = j0; j < j1; ++j) {
              if (plan.instrument) {
                const std::array<std::pair<std::ptrdiff_t, std::int64_t>, 5> reads{{
                    {detail::line_tag_index(g, k, j), level - 1},
                    {detail::line_tag_index(g, k, j - 1), level},
                    {detail::line_tag_index(g, k, j + 1), level - 1},
                    {detail::line_tag_index(g, k - 1, j), level},
                    {detail::line_tag_index(g, k + 1, j), level - 1}}};
                for (auto [idx, expected] : reads)
                  if (idx >= 0)
                    tags.check(static_cast<std::size_t>(idx), expected,
                               counters.violations);
              }
              detail::gs_update(plan.kernel, g.line(k, j), g.line(k, j - 1),
                                g.line(k, j + 1), g.line(k - 1, j),
                                g.line(k + 1, j), ni, plan.coeffs.b);
              if (plan.instrument)
                tags.set(static_cast<std::size_t>(detail::line_tag_index(g, k, j)),
                         level);
              ++updates;
              detail::shake(plan.instrument);
            }
          }
          barrier.wait(rank);
          ++phases;
        }
      }
    }
    counters.line_updates.fetch_add(updates, std::memory_order_relaxed);
    if (rank == 0) counters.barrier_phases = phases;
  });

  if (auto w = detail::cache_fit_warning(plan.wavefront, g); !w.empty())
    report.warnings.push_back(std::move(w));
  detail::fill_stats(stats, counters, T, std::move(report));
  return g;
}

}  // namespace stencilwave
