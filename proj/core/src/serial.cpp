#include <utility>

#include "sweep_detail.hpp"

namespace stencilwave {

Grid3D run_serial(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  if (plan.iterations < 0) fail(ErrorCode::plan, "iteration count must be >= 0");
  const Index ni = g.ni(), nj = g.nj(), nk = g.nk();
  std::uint64_t lines = 0;

  if (plan.kernel == KernelKind::jacobi) {
    if (plan.iterations > 0) {
      Grid3D other = g;
      Grid3D* src = &g;
      Grid3D* dst = &other;
      for (int it = 0; it < plan.iterations; ++it) {
        for (Index k = 0; k < nk; ++k)
          for (Index j = 0; j < nj; ++j)
            detail::jacobi_update(plan.nt_stores, src->line(k, j),
                                  src->line(k, j - 1), src->line(k, j + 1),
                                  src->line(k - 1, j), src->line(k + 1, j),
                                  dst->line(k, j), ni, plan.coeffs);
        if (plan.nt_stores) stream_fence();
        lines += static_cast<std::uint64_t>(nk * nj);
        std::swap(src, dst);
      }
      if (src != &g) g = std::move(*src);
    }
  } else {
    for (int it = 0; it < plan.iterations; ++it) {
      for (Index k = 0; k < nk; ++k)
        for (Index j = 0; j < nj; ++j)
          detail::gs_update(plan.kernel, g.line(k, j), g.line(k, j - 1),
                            g.line(k, j + 1), g.line(k - 1, j),
                            g.line(k + 1, j), ni, plan.coeffs.b);
      lines += static_cast<std::uint64_t>(nk * nj);
    }
  }

  if (stats) {
    stats->line_updates = lines;
    stats->barrier_phases = 0;
    stats->violations = 0;
    stats->team_size = 1;
    stats->pinned = false;
  }
  return g;
}

}  // namespace stencilwave
