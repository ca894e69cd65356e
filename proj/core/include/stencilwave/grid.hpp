#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <variant>

namespace stencilwave {

/// Signed coordinate; halo cells sit at -1 and n.
using Index = std::ptrdiff_t;

inline constexpr Index kHalo = 1;
inline constexpr std::size_t kCacheLine = 64;

namespace pattern {
struct Uniform {
  double value = 0.0;
};
/// value = i + j + k, evaluated at halo coordinates as well.
struct Linear {};
/// Interior drawn from [lo, hi) with a 64-bit Mersenne twister; halo is 0.
struct SeededRandom {
  std::uint64_t seed = 42;
  double lo = 0.0;
  double hi = 1.0;
};
}  // namespace pattern

using InitPattern =
    std::variant<pattern::Uniform, pattern::Linear, pattern::SeededRandom>;

/// Halo-padded 3D scalar field. Layout is k-outer, j-middle, i-contiguous;
/// the halo is one cell wide and carries Dirichlet boundary values that no
/// kernel writes.
///
/// The backing block is 64-byte aligned and the data pointer is offset so
/// that interior cell (0,0,0) lands on a cache-line boundary; every line
/// start is aligned whenever (ni + 2) is a multiple of 8.
class Grid3D {
 public:
  Grid3D(Index ni, Index nj, Index nk);

  Grid3D(const Grid3D& other);
  Grid3D& operator=(const Grid3D& other);
  Grid3D(Grid3D&&) noexcept = default;
  Grid3D& operator=(Grid3D&&) noexcept = default;
  ~Grid3D() = default;

  Index ni() const noexcept { return ni_; }
  Index nj() const noexcept { return nj_; }
  Index nk() const noexcept { return nk_; }

  Index row_stride() const noexcept { return ni_ + 2; }
  Index plane_stride() const noexcept { return (ni_ + 2) * (nj_ + 2); }
  std::size_t size() const noexcept { return size_; }
  std::uint64_t interior_cells() const noexcept {
    return static_cast<std::uint64_t>(ni_) * nj_ * nk_;
  }

  /// Unchecked offset of (k, j, i) in the padded box.
  Index offset(Index k, Index j, Index i) const noexcept {
    return (k + 1) * plane_stride() + (j + 1) * row_stride() + (i + 1);
  }

  /// Checked offset; throws a bounds error outside the padded box.
  std::size_t flat_index(Index k, Index j, Index i) const;

  double& operator()(Index k, Index j, Index i) noexcept {
    return data_[offset(k, j, i)];
  }
  double operator()(Index k, Index j, Index i) const noexcept {
    return data_[offset(k, j, i)];
  }
  double& at(Index k, Index j, Index i) { return data_[flat_index(k, j, i)]; }
  double at(Index k, Index j, Index i) const {
    return data_[flat_index(k, j, i)];
  }

  /// Pointer to interior cell (k, j, 0); [-1] and [ni] are the halo columns.
  double* line(Index k, Index j) noexcept { return data_ + offset(k, j, 0); }
  const double* line(Index k, Index j) const noexcept {
    return data_ + offset(k, j, 0);
  }

  std::span<double> data() noexcept { return {data_, size_}; }
  std::span<const double> data() const noexcept { return {data_, size_}; }

  bool is_halo(Index k, Index j, Index i) const noexcept {
    return k < 0 || j < 0 || i < 0 || k >= nk_ || j >= nj_ || i >= ni_;
  }

 private:
  struct AlignedDelete {
    void operator()(double* p) const noexcept;
  };

  void allocate();

  Index ni_ = 0;
  Index nj_ = 0;
  Index nk_ = 0;
  std::size_t size_ = 0;
  std::unique_ptr<double[], AlignedDelete> block_;
  double* data_ = nullptr;
};

Grid3D create_grid(Index ni, Index nj, Index nk, const InitPattern& pattern);

bool same_shape(const Grid3D& a, const Grid3D& b) noexcept;

/// Compares every stored value, halo included, by bit pattern.
bool bitwise_equal(const Grid3D& a, const Grid3D& b) noexcept;

struct CellDifference {
  Index k = 0;
  Index j = 0;
  Index i = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// First interior cell (lexicographic k, j, i) whose bit patterns differ.
std::optional<CellDifference> first_difference(const Grid3D& a,
                                               const Grid3D& b);

struct GridSummary {
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;
  /// FNV-1a over the interior bit patterns in k, j, i order.
  std::uint64_t checksum = 0;
};

GridSummary summarize(const Grid3D& g);

/// Binary dump: three little-endian uint64 extents (nk, nj, ni), then the
/// interior values as little-endian doubles in k, j, i order.
void write_binary(const Grid3D& g, const std::filesystem::path& path);

/// Reads a dump written by write_binary. The halo of the result is zero.
Grid3D read_binary(const std::filesystem::path& path);

}  // namespace stencilwave
