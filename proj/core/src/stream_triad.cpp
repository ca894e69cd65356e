#include <algorithm>
#include <chrono>
#include <memory>
#include <new>
#include <string>

#include "stencilwave/error.hpp"
#include "stencilwave/kernels.hpp"
#include "stencilwave/perf.hpp"
#include "stencilwave/thread_team.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace stencilwave {

namespace {

struct AlignedFree {
  void operator()(double* p) const noexcept {
    ::operator delete[](p, std::align_val_t{64});
  }
};
using Array = std::unique_ptr<double[], AlignedFree>;

Array allocate(std::size_t n) {
  void* p = ::operator new[](n * sizeof(double), std::align_val_t{64}, std::nothrow);
  if (!p) fail(ErrorCode::resource, "cannot allocate " + std::to_string(n) +
                                        " doubles for the triad");
  return Array(static_cast<double*>(p));
}

constexpr double kScalar = 3.0;

void triad(double* a, const double* b, const double* c, std::size_t n,
           bool nt) noexcept {
#if defined(__SSE2__)
  if (nt) {
    const __m128d s = _mm_set1_pd(kScalar);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
      const __m128d v = _mm_add_pd(_mm_load_pd(b + i), _mm_mul_pd(s, _mm_load_pd(c + i)));
      _mm_stream_pd(a + i, v);
    }
    for (; i < n; ++i) a[i] = b[i] + kScalar * c[i];
    return;
  }
#endif
  (void)nt;
  for (std::size_t i = 0; i < n; ++i) a[i] = b[i] + kScalar * c[i];
}

}  // namespace

std::size_t default_stream_elements(std::optional<std::uint64_t> outer_cache_bytes,
                                     std::uint64_t max_bytes) {
  std::uint64_t n = std::uint64_t{1} << 21;
  if (outer_cache_bytes)
    n = std::max<std::uint64_t>(n, (4 * *outer_cache_bytes + 23) / 24);
  n = std::min<std::uint64_t>(n, max_bytes / 24);
  return static_cast<std::size_t>(std::max<std::uint64_t>(n, 1));
}

StreamResult stream_triad(const StreamOptions& opts) {
  if (opts.elements == 0) fail(ErrorCode::config, "triad needs at least one element");
  if (opts.threads < 1) fail(ErrorCode::config, "triad needs at least one thread");
  if (opts.repetitions < 1) fail(ErrorCode::config, "repetitions must be >= 1");
  const std::uint64_t footprint = 3 * sizeof(double) * opts.elements;
  if (opts.outer_cache_bytes && footprint < 4 * *opts.outer_cache_bytes)
    fail(ErrorCode::config,
         "triad arrays (" + std::to_string(footprint) +
             " B) must be at least 4x the outer cache (" +
             std::to_string(*opts.outer_cache_bytes) + " B)");

  StreamResult result;
  result.nt_stores = opts.nt_stores && streaming_stores_supported();
  if (opts.nt_stores && !result.nt_stores)
    result.warnings.push_back("streaming stores unsupported; counted as write-allocate");
  result.bytes_per_element = result.nt_stores ? kTriadBytesNt : kTriadBytesWriteAllocate;

  const std::size_t n = opts.elements;
  Array a = allocate(n), b = allocate(n), c = allocate(n);

  // Chunks start on cache-line boundaries.
  const auto T = static_cast<std::size_t>(opts.threads);
  std::vector<std::size_t> bounds(T + 1, n);
  const std::size_t lines = (n + 7) / 8;
  for (std::size_t r = 0; r < T; ++r)
    bounds[r] = std::min(n, (lines * r / T) * 8);
  bounds[T] = n;

  Barrier barrier(T, BarrierKind::central_spin);
  std::vector<double> seconds(static_cast<std::size_t>(opts.repetitions));
  auto report = run_team(T, opts.pinning, [&](std::size_t rank) {
    const std::size_t lo = bounds[rank], hi = bounds[rank + 1];
    for (std::size_t i = lo; i < hi; ++i) {
      a[i] = 0.0;
      b[i] = 1.0 + static_cast<double>(i % 7);
      c[i] = 2.0;
    }
    using clock = std::chrono::steady_clock;
    clock::time_point t0;
    for (int rep = 0; rep < opts.repetitions; ++rep) {
      barrier.wait(rank);
      if (rank == 0) t0 = clock::now();
      triad(a.get() + lo, b.get() + lo, c.get() + lo, hi - lo, result.nt_stores);
      if (result.nt_stores) stream_fence();
      barrier.wait(rank);
      if (rank == 0)
        seconds[static_cast<std::size_t>(rep)] =
            std::chrono::duration<double>(clock::now() - t0).count();
    }
  });
  result.pinned = report.pinned;
  for (auto& w : report.warnings) result.warnings.push_back(std::move(w));

  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i] + kScalar * c[i])
      fail(ErrorCode::domain, "triad validation failed at element " + std::to_string(i));
  }
  result.validated = true;
  result.seconds = seconds;
  const double med = median(seconds);
  if (med > 0.0)
    result.bandwidth = result.bytes_per_element * static_cast<double>(n) / med;
  else
    result.warnings.push_back("triad too short to time");
  return result;
}

}  // namespace stencilwave
