#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "stencilwave/error.hpp"
#include "stencilwave/kernels.hpp"

namespace sw = stencilwave;

namespace {

// Scalar references, written cell by cell from the update formulas.
double jacobi_cell(const sw::Grid3D& s, sw::StencilCoeffs c, sw::Index k, sw::Index j,
                   sw::Index i) {
  double sum = s(k, j, i - 1);
  sum = sum + s(k, j, i + 1);
  sum = sum + s(k, j - 1, i);
  sum = sum + s(k, j + 1, i);
  sum = sum + s(k - 1, j, i);
  sum = sum + s(k + 1, j, i);
  return c.a * s(k, j, i) + c.b * sum;
}

void gs_reference(sw::Grid3D& g, double b, sw::Index k, sw::Index j) {
  for (sw::Index i = 0; i < g.ni(); ++i) {
    double sum = g(k, j, i - 1);
    sum = sum + g(k, j, i + 1);
    sum = sum + g(k, j - 1, i);
    sum = sum + g(k, j + 1, i);
    sum = sum + g(k - 1, j, i);
    sum = sum + g(k + 1, j, i);
    g(k, j, i) = b * sum;
  }
}

sw::Grid3D random6(std::uint64_t seed = 42) {
  return sw::create_grid(6, 6, 6, sw::pattern::SeededRandom{seed, 0.0, 1.0});
}

}  // namespace

TEST(Jacobi, IdentityCoefficientsCopyLine) {
  const auto src = random6();
  sw::Grid3D dst(6, 6, 6);
  sw::jacobi_line_update(src, dst, {1.0, 0.0}, 2, 3);
  for (sw::Index i = 0; i < 6; ++i) EXPECT_EQ(dst(2, 3, i), src(2, 3, i));
}

TEST(Jacobi, UniformIsFixedPoint) {
  const auto src = sw::create_grid(5, 4, 3, sw::pattern::Uniform{3.0});
  sw::Grid3D dst(5, 4, 3);
  for (sw::Index k = 0; k < 3; ++k)
    for (sw::Index j = 0; j < 4; ++j) sw::jacobi_line_update(src, dst, {}, k, j);
  for (sw::Index k = 0; k < 3; ++k)
    for (sw::Index j = 0; j < 4; ++j)
      for (sw::Index i = 0; i < 5; ++i) EXPECT_EQ(dst(k, j, i), 3.0);
}

TEST(Jacobi, LinearFieldIsFixedPoint) {
  const auto src = sw::create_grid(7, 5, 4, sw::pattern::Linear{});
  sw::Grid3D dst(7, 5, 4);
  for (sw::Index k = 0; k < 4; ++k)
    for (sw::Index j = 0; j < 5; ++j) {
      sw::jacobi_line_update(src, dst, {}, k, j);
      for (sw::Index i = 0; i < 7; ++i)
        EXPECT_EQ(dst(k, j, i), static_cast<double>(i + j + k));
    }
}

TEST(Jacobi, MatchesScalarReferenceBitwise) {
  const auto src = random6();
  const sw::StencilCoeffs c{0.5, 0.1};
  sw::Grid3D dst(6, 6, 6);
  const auto before = src;
  sw::jacobi_line_update(src, dst, c, 2, 3);
  for (sw::Index i = 0; i < 6; ++i) {
    const double want = jacobi_cell(src, c, 2, 3, i);
    EXPECT_EQ(std::memcmp(&want, &dst(2, 3, i), sizeof(double)), 0) << "i=" << i;
  }
  EXPECT_TRUE(sw::bitwise_equal(src, before));
}

TEST(Jacobi, StreamingVariantMatchesPlain) {
  for (sw::Index ni : {1, 2, 3, 8, 17, 64}) {
    const auto src = sw::create_grid(ni, 3, 3, sw::pattern::SeededRandom{5, -1.0, 1.0});
    sw::Grid3D a(ni, 3, 3), b(ni, 3, 3);
    const sw::StencilCoeffs c{0.3, 0.11};
    for (sw::Index k = 0; k < 3; ++k)
      for (sw::Index j = 0; j < 3; ++j) {
        sw::jacobi_line(src.line(k, j), src.line(k, j - 1), src.line(k, j + 1),
                        src.line(k - 1, j), src.line(k + 1, j), a.line(k, j), ni, c);
        sw::jacobi_line_stream(src.line(k, j), src.line(k, j - 1), src.line(k, j + 1),
                               src.line(k - 1, j), src.line(k + 1, j), b.line(k, j),
                               ni, c);
      }
    sw::stream_fence();
    EXPECT_TRUE(sw::bitwise_equal(a, b)) << "ni=" << ni;
  }
}

TEST(Jacobi, ContractErrors) {
  const auto src = random6();
  sw::Grid3D other(6, 6, 5);
  auto code_of = [](auto f) {
    try {
      f();
    } catch (const sw::Error& e) {
      return e.code();
    }
    return sw::ErrorCode::io;
  };
  EXPECT_EQ(code_of([&] { sw::jacobi_line_update(src, other, {}, 0, 0); }),
            sw::ErrorCode::shape);
  auto same = src;
  EXPECT_EQ(code_of([&] { sw::jacobi_line_update(same, same, {}, 0, 0); }),
            sw::ErrorCode::aliasing);
  sw::Grid3D dst(6, 6, 6);
  EXPECT_EQ(code_of([&] { sw::jacobi_line_update(src, dst, {}, 6, 0); }),
            sw::ErrorCode::bounds);
  EXPECT_EQ(code_of([&] { sw::jacobi_line_update(src, dst, {}, 0, -1); }),
            sw::ErrorCode::bounds);
}

TEST(GaussSeidel, UniformAndLinearAreFixedPoints) {
  auto u = sw::create_grid(6, 6, 6, sw::pattern::Uniform{2.5});
  auto l = sw::create_grid(6, 6, 6, sw::pattern::Linear{});
  const auto u0 = u, l0 = l;
  for (sw::Index k = 0; k < 6; ++k)
    for (sw::Index j = 0; j < 6; ++j) {
      sw::gs_line_update(u, 1.0 / 6.0, k, j);
      sw::gs_line_update_interleaved(l, 1.0 / 6.0, k, j);
    }
  EXPECT_TRUE(sw::bitwise_equal(u, u0));
  EXPECT_TRUE(sw::bitwise_equal(l, l0));
}

TEST(GaussSeidel, MatchesInPlaceReferenceBitwise) {
  auto g = random6();
  auto want = g;
  sw::gs_line_update(g, 1.0 / 6.0, 1, 1);
  gs_reference(want, 1.0 / 6.0, 1, 1);
  EXPECT_TRUE(sw::bitwise_equal(g, want));
}

TEST(GaussSeidel, FullSweepMatchesTextbookOrder) {
  auto g = random6(3);
  auto want = g;
  for (sw::Index k = 0; k < 6; ++k)
    for (sw::Index j = 0; j < 6; ++j) {
      sw::gs_line_update(g, 1.0 / 6.0, k, j);
      gs_reference(want, 1.0 / 6.0, k, j);
    }
  EXPECT_TRUE(sw::bitwise_equal(g, want));
}

TEST(GaussSeidel, InterleavedExactOnIntegerData) {
  // Small integers with a power-of-two weight keep every partial sum exact;
  // with b = 1/4 the left-neighbor recursion adds two bits per cell, so long
  // lines use b = 1.
  for (sw::Index ni : {1, 2, 3, 8, 16, 33}) {
    const double weight = ni <= 16 ? 0.25 : 1.0;
    auto g = sw::create_grid(ni, 4, 4, sw::pattern::Uniform{0.0});
    std::uint64_t x = 12345;
    for (double& v : g.data()) {
      x = x * 6364136223846793005ULL + 1442695040888963407ULL;
      v = static_cast<double>((x >> 33) % 64);
    }
    for (sw::Index k = 0; k < 4; ++k)
      for (sw::Index j = 0; j < 4; ++j) {
        auto a = g, b = g;
        sw::gs_line_update(a, weight, k, j);
        sw::gs_line_update_interleaved(b, weight, k, j);
        EXPECT_TRUE(sw::bitwise_equal(a, b)) << "ni=" << ni << " k=" << k << " j=" << j;
      }
  }
}

TEST(GaussSeidel, InterleavedWithinReassociationBound) {
  auto a = random6();
  auto b = a;
  double worst = 0.0;
  for (sw::Index k = 0; k < 6; ++k)
    for (sw::Index j = 0; j < 6; ++j) {
      sw::gs_line_update(a, 1.0 / 6.0, k, j);
      sw::gs_line_update_interleaved(b, 1.0 / 6.0, k, j);
    }
  for (sw::Index k = 0; k < 6; ++k)
    for (sw::Index j = 0; j < 6; ++j)
      for (sw::Index i = 0; i < 6; ++i)
        worst = std::max(worst, std::abs(a(k, j, i) - b(k, j, i)) / std::abs(a(k, j, i)));
  EXPECT_LE(worst, 1e-13);
}

TEST(GaussSeidel, InterleavedFollowsItsAssociation) {
  // Independent oracle for the interleaved form: the pending sum of the five
  // non-recursive terms is added to the already-updated left neighbor last.
  auto g = random6(8);
  auto want = g;
  const double b = 1.0 / 6.0;
  for (sw::Index i = 0; i < 6; ++i) {
    double rest = want(1, 2, i + 1);
    rest = rest + want(1, 1, i);
    rest = rest + want(1, 3, i);
    rest = rest + want(0, 2, i);
    rest = rest + want(2, 2, i);
    want(1, 2, i) = b * (want(1, 2, i - 1) + rest);
  }
  sw::gs_line_update_interleaved(g, b, 1, 2);
  EXPECT_TRUE(sw::bitwise_equal(g, want));
}

TEST(GaussSeidel, BoundsErrors) {
  auto g = random6();
  EXPECT_THROW(sw::gs_line_update(g, 0.1, -1, 0), sw::Error);
  EXPECT_THROW(sw::gs_line_update_interleaved(g, 0.1, 0, 6), sw::Error);
}

TEST(Kernels, FlopAccounting) {
  EXPECT_EQ(sw::kJacobiFlops.adds, 6);
  EXPECT_EQ(sw::kJacobiFlops.muls, 2);
  EXPECT_EQ(sw::kGaussSeidelFlops.adds, 5);
  EXPECT_EQ(sw::kGaussSeidelFlops.muls, 1);
}
