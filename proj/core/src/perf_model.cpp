#include <cmath>
#include <string>

#include "stencilwave/error.hpp"
#include "stencilwave/perf.hpp"

namespace stencilwave {

double predict_p0(double bandwidth, double bytes_per_lup) {
  if (!(bandwidth > 0.0) || !(bytes_per_lup > 0.0) || !std::isfinite(bandwidth) ||
      !std::isfinite(bytes_per_lup))
    fail(ErrorCode::domain, "bandwidth and bytes per update must be positive");
  return bandwidth / bytes_per_lup;
}

PerfModel make_perf_model(double bandwidth, double bytes_per_lup) {
  return PerfModel{bandwidth, bytes_per_lup, predict_p0(bandwidth, bytes_per_lup)};
}

double predict_traffic(KernelKind kernel, Variant variant, int t, bool nt_stores) {
  if (t < 1) fail(ErrorCode::domain, "blocking factor must be >= 1");
  const bool jacobi = kernel == KernelKind::jacobi;
  if (jacobi && variant == Variant::pipeline)
    fail(ErrorCode::domain, "no pipeline variant for Jacobi");
  if (!jacobi && variant == Variant::threaded)
    fail(ErrorCode::domain, "no threaded variant for Gauss-Seidel");
  const double plain = jacobi ? (nt_stores ? 16.0 : 24.0) : 16.0;
  return variant == Variant::wavefront ? plain / t : plain;
}

}  // namespace stencilwave
