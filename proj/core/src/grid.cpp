#include "stencilwave/grid.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <random>
#include <string>

#include "stencilwave/error.hpp"

namespace stencilwave {

namespace {

// Leading pad (in doubles) so that data_[1], the first interior cell of
// line (0, 0) in plane 0 minus the halo plane, sits on a cache line.
constexpr std::size_t kLeadPad = kCacheLine / sizeof(double) - 1;

double uniform_unit(std::mt19937_64& rng) {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementation so seeded grids are reproducible anywhere.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  out.write(bytes, 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) fail(ErrorCode::io, "truncated grid dump");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
  return v;
}

}  // namespace

void Grid3D::AlignedDelete::operator()(double* p) const noexcept {
  ::operator delete[](p, std::align_val_t{kCacheLine});
}

Grid3D::Grid3D(Index ni, Index nj, Index nk) : ni_(ni), nj_(nj), nk_(nk) {
  if (ni < 1 || nj < 1 || nk < 1) {
    fail(ErrorCode::dimension, "grid extents must be >= 1, got " +
                                   std::to_string(ni) + "x" +
                                   std::to_string(nj) + "x" +
                                   std::to_string(nk));
  }
  allocate();
  std::fill_n(data_, size_, 0.0);
}

Grid3D::Grid3D(const Grid3D& other)
    : ni_(other.ni_), nj_(other.nj_), nk_(other.nk_) {
  allocate();
  std::copy_n(other.data_, size_, data_);
}

Grid3D& Grid3D::operator=(const Grid3D& other) {
  if (this != &other) {
    Grid3D copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Grid3D::allocate() {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max() / sizeof(double);
  const auto pi = static_cast<std::size_t>(ni_) + 2;
  const auto pj = static_cast<std::size_t>(nj_) + 2;
  const auto pk = static_cast<std::size_t>(nk_) + 2;
  if (pi > kMax / pj || pi * pj > kMax / pk || pi * pj * pk > kMax - kLeadPad) {
    fail(ErrorCode::resource, "grid storage size overflows");
  }
  size_ = pi * pj * pk;
  auto* raw = static_cast<double*>(::operator new[](
      (size_ + kLeadPad) * sizeof(double), std::align_val_t{kCacheLine},
      std::nothrow));
  if (raw == nullptr) {
    fail(ErrorCode::resource, "cannot allocate " +
                                  std::to_string(size_ * sizeof(double)) +
                                  " bytes of grid storage");
  }
  block_.reset(raw);
  data_ = raw + kLeadPad;
}

std::size_t Grid3D::flat_index(Index k, Index j, Index i) const {
  if (k < -1 || k > nk_ || j < -1 || j > nj_ || i < -1 || i > ni_) {
    fail(ErrorCode::bounds, "coordinate (" + std::to_string(k) + "," +
                                std::to_string(j) + "," + std::to_string(i) +
                                ") outside the padded box");
  }
  return static_cast<std::size_t>(offset(k, j, i));
}

Grid3D create_grid(Index ni, Index nj, Index nk, const InitPattern& pattern) {
  Grid3D g(ni, nj, nk);
  std::visit(
      [&g](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, pattern::Uniform>) {
          std::fill(g.data().begin(), g.data().end(), p.value);
        } else if constexpr (std::is_same_v<P, pattern::Linear>) {
          for (Index k = -1; k <= g.nk(); ++k)
            for (Index j = -1; j <= g.nj(); ++j)
              for (Index i = -1; i <= g.ni(); ++i)
                g(k, j, i) = static_cast<double>(i + j + k);
        } else {
          std::mt19937_64 rng(p.seed);
          const double span = p.hi - p.lo;
          for (Index k = 0; k < g.nk(); ++k)
            for (Index j = 0; j < g.nj(); ++j) {
              double* line = g.line(k, j);
              for (Index i = 0; i < g.ni(); ++i)
                line[i] = p.lo + span * uniform_unit(rng);
            }
        }
      },
      pattern);
  return g;
}

bool same_shape(const Grid3D& a, const Grid3D& b) noexcept {
  return a.ni() == b.ni() && a.nj() == b.nj() && a.nk() == b.nk();
}

bool bitwise_equal(const Grid3D& a, const Grid3D& b) noexcept {
  return same_shape(a, b) &&
         std::memcmp(a.data().data(), b.data().data(),
                     a.size() * sizeof(double)) == 0;
}

std::optional<CellDifference> first_difference(const Grid3D& a,
                                               const Grid3D& b) {
  if (!same_shape(a, b)) fail(ErrorCode::shape, "grids differ in extents");
  for (Index k = 0; k < a.nk(); ++k)
    for (Index j = 0; j < a.nj(); ++j) {
      const double* la = a.line(k, j);
      const double* lb = b.line(k, j);
      for (Index i = 0; i < a.ni(); ++i) {
        if (std::bit_cast<std::uint64_t>(la[i]) !=
            std::bit_cast<std::uint64_t>(lb[i]))
          return CellDifference{k, j, i, la[i], lb[i]};
      }
    }
  return std::nullopt;
}

GridSummary summarize(const Grid3D& g) {
  GridSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (Index k = 0; k < g.nk(); ++k)
    for (Index j = 0; j < g.nj(); ++j) {
      const double* line = g.line(k, j);
      for (Index i = 0; i < g.ni(); ++i) {
        const double v = line[i];
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        s.sum += v;
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
          hash ^= (bits >> (8 * b)) & 0xffu;
          hash *= 0x100000001b3ull;
        }
      }
    }
  s.checksum = hash;
  return s;
}

void write_binary(const Grid3D& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  put_u64_le(out, static_cast<std::uint64_t>(g.nk()));
  put_u64_le(out, static_cast<std::uint64_t>(g.nj()));
  put_u64_le(out, static_cast<std::uint64_t>(g.ni()));
  for (Index k = 0; k < g.nk(); ++k)
    for (Index j = 0; j < g.nj(); ++j) {
      const double* line = g.line(k, j);
      for (Index i = 0; i < g.ni(); ++i)
        put_u64_le(out, std::bit_cast<std::uint64_t>(line[i]));
    }
  if (!out) fail(ErrorCode::io, "short write to " + path.string());
}

Grid3D read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  const auto nk = static_cast<Index>(get_u64_le(in));
  const auto nj = static_cast<Index>(get_u64_le(in));
  const auto ni = static_cast<Index>(get_u64_le(in));
  Grid3D g(ni, nj, nk);
  for (Index k = 0; k < nk; ++k)
    for (Index j = 0; j < nj; ++j) {
      double* line = g.line(k, j);
      for (Index i = 0; i < ni; ++i)
        line[i] = std::bit_cast<double>(get_u64_le(in));
    }
  return g;
}

}  // namespace stencilwave
