#include "stencilwave/kernels.hpp"

#include <cstdint>
#include <string>

#include "stencilwave/error.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#define STENCILWAVE_HAVE_STREAM 1
#endif

namespace stencilwave {

void jacobi_line(const double* __restrict center, const double* __restrict south,
                 const double* __restrict north, const double* __restrict below,
                 const double* __restrict above, double* __restrict out, Index n,
                 StencilCoeffs c) noexcept {
  const double a = c.a;
  const double b = c.b;
  for (Index i = 0; i < n; ++i) {
    out[i] = a * center[i] + b * (center[i - 1] + center[i + 1] + south[i] +
                                  north[i] + below[i] + above[i]);
  }
}

bool streaming_stores_supported() noexcept {
#ifdef STENCILWAVE_HAVE_STREAM
  return true;
#else
  return false;
#endif
}

void stream_fence() noexcept {
#ifdef STENCILWAVE_HAVE_STREAM
  _mm_sfence();
#endif
}

void jacobi_line_stream(const double* center, const double* south,
                        const double* north, const double* below,
                        const double* above, double* out, Index n,
                        StencilCoeffs c) noexcept {
#ifdef STENCILWAVE_HAVE_STREAM
  Index i = 0;
  // Scalar head up to the first 16-byte boundary of the output.
  while (i < n && (reinterpret_cast<std::uintptr_t>(out + i) & 15u) != 0) {
    out[i] = c.a * center[i] + c.b * (center[i - 1] + center[i + 1] + south[i] +
                                      north[i] + below[i] + above[i]);
    ++i;
  }
  const __m128d va = _mm_set1_pd(c.a);
  const __m128d vb = _mm_set1_pd(c.b);
  for (; i + 1 < n; i += 2) {
    __m128d sum = _mm_add_pd(_mm_loadu_pd(center + i - 1),
                             _mm_loadu_pd(center + i + 1));
    sum = _mm_add_pd(sum, _mm_loadu_pd(south + i));
    sum = _mm_add_pd(sum, _mm_loadu_pd(north + i));
    sum = _mm_add_pd(sum, _mm_loadu_pd(below + i));
    sum = _mm_add_pd(sum, _mm_loadu_pd(above + i));
    const __m128d r = _mm_add_pd(_mm_mul_pd(va, _mm_loadu_pd(center + i)),
                                 _mm_mul_pd(vb, sum));
    _mm_stream_pd(out + i, r);
  }
  for (; i < n; ++i) {
    out[i] = c.a * center[i] + c.b * (center[i - 1] + center[i + 1] + south[i] +
                                      north[i] + below[i] + above[i]);
  }
#else
  jacobi_line(center, south, north, below, above, out, n, c);
#endif
}

void gs_line(double* center, const double* south, const double* north,
             const double* below, const double* above, Index n,
             double b) noexcept {
  for (Index i = 0; i < n; ++i) {
    center[i] = b * (center[i - 1] + center[i + 1] + south[i] + north[i] +
                     below[i] + above[i]);
  }
}

void gs_line_interleaved(double* center, const double* south,
                         const double* north, const double* below,
                         const double* above, Index n, double b) noexcept {
  if (n < 2) {
    gs_line(center, south, north, below, above, n, b);
    return;
  }
  double pending = center[1] + south[0] + north[0] + below[0] + above[0];
  for (Index i = 0; i < n - 1; ++i) {
    const double next = center[i + 2] + south[i + 1] + north[i + 1] +
                        below[i + 1] + above[i + 1];
    center[i] = b * (center[i - 1] + pending);
    pending = next;
  }
  center[n - 1] = b * (center[n - 2] + pending);
}

namespace {

void check_line(const Grid3D& g, Index k, Index j) {
  if (k < 0 || k >= g.nk() || j < 0 || j >= g.nj()) {
    fail(ErrorCode::bounds, "line (k=" + std::to_string(k) + ", j=" +
                                std::to_string(j) + ") outside the interior");
  }
}

}  // namespace

void jacobi_line_update(const Grid3D& src, Grid3D& dst, StencilCoeffs c,
                        Index k, Index j) {
  if (!same_shape(src, dst)) fail(ErrorCode::shape, "src and dst extents differ");
  if (src.data().data() == dst.data().data())
    fail(ErrorCode::aliasing, "Jacobi needs distinct src and dst storage");
  check_line(src, k, j);
  jacobi_line(src.line(k, j), src.line(k, j - 1), src.line(k, j + 1),
              src.line(k - 1, j), src.line(k + 1, j), dst.line(k, j), src.ni(),
              c);
}

void gs_line_update(Grid3D& g, double b, Index k, Index j) {
  check_line(g, k, j);
  gs_line(g.line(k, j), g.line(k, j - 1), g.line(k, j + 1), g.line(k - 1, j),
          g.line(k + 1, j), g.ni(), b);
}

void gs_line_update_interleaved(Grid3D& g, double b, Index k, Index j) {
  check_line(g, k, j);
  gs_line_interleaved(g.line(k, j), g.line(k, j - 1), g.line(k, j + 1),
                      g.line(k - 1, j), g.line(k + 1, j), g.ni(), b);
}

}  // namespace stencilwave
