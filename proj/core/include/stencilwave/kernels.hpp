#pragma once

#include "stencilwave/grid.hpp"

namespace stencilwave {

/// Weights of the 7-point star: a on the center (Jacobi only), b on each of
/// the six neighbors.
struct StencilCoeffs {
  double a = 0.0;
  double b = 1.0 / 6.0;
};

struct FlopCount {
  int adds = 0;
  int muls = 0;
};

inline constexpr FlopCount kJacobiFlops{6, 2};
inline constexpr FlopCount kGaussSeidelFlops{5, 1};

// Line-level kernels. `center` points at interior cell i = 0 of a line whose
// halo columns center[-1] and center[n] are readable. The four neighbor
// pointers address the same i = 0 position in the j-1, j+1, k-1 and k+1
// lines. Neighbor terms are summed left to right in the order
// (i-1, i+1, j-1, j+1, k-1, k+1).

/// Out-of-place Jacobi. The inner loop carries no dependence and vectorizes.
void jacobi_line(const double* __restrict center, const double* __restrict south,
                 const double* __restrict north, const double* __restrict below,
                 const double* __restrict above, double* __restrict out, Index n,
                 StencilCoeffs c) noexcept;

/// Same arithmetic as jacobi_line, written with non-temporal stores where the
/// target supports them (falls back to jacobi_line otherwise). Call
/// stream_fence() before publishing the written data to another thread.
void jacobi_line_stream(const double* center, const double* south,
                        const double* north, const double* below,
                        const double* above, double* out, Index n,
                        StencilCoeffs c) noexcept;

bool streaming_stores_supported() noexcept;
void stream_fence() noexcept;

/// In-place lexicographic Gauss-Seidel over one line. The recursion through
/// center[i-1] rules out SIMD.
void gs_line(double* center, const double* south, const double* north,
             const double* below, const double* above, Index n,
             double b) noexcept;

/// Gauss-Seidel with the five non-recursive terms of cell i+1 accumulated
/// while cell i is finished, which breaks the add-latency chain. Differs from
/// gs_line only in the association of the i-1 term. Requires n >= 2; shorter
/// lines go through gs_line.
void gs_line_interleaved(double* center, const double* south,
                         const double* north, const double* below,
                         const double* above, Index n, double b) noexcept;

// Grid-level wrappers with contract checks.

void jacobi_line_update(const Grid3D& src, Grid3D& dst, StencilCoeffs c,
                        Index k, Index j);
void gs_line_update(Grid3D& g, double b, Index k, Index j);
void gs_line_update_interleaved(Grid3D& g, double b, Index k, Index j);

}  // namespace stencilwave
