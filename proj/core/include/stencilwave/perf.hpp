#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stencilwave/sweeps.hpp"

namespace stencilwave {

// Bandwidth model: a memory-bound stencil sweep cannot update more than
// M_S / bytes_per_lup lattice sites per second.

struct PerfModel {
  double bandwidth = 0.0;      ///< M_S, bytes per second
  double bytes_per_lup = 0.0;  ///< memory traffic per lattice site update
  double p0 = 0.0;             ///< predicted ceiling, updates per second
};

/// M_S / bytes_per_lup. Domain error unless both are positive and finite.
double predict_p0(double bandwidth, double bytes_per_lup);
PerfModel make_perf_model(double bandwidth, double bytes_per_lup);

/// Minimum main-memory traffic per update: one 8-byte load and one 8-byte
/// store, plus an 8-byte write-allocate for out-of-place Jacobi without
/// streaming stores. Wavefront blocking with factor t divides the plain
/// figure by t. Serial, threaded and pipeline count as plain. Domain error
/// for t < 1 and for combinations no engine implements.
double predict_traffic(KernelKind kernel, Variant variant, int t, bool nt_stores);

// Timing.

struct HostFingerprint {
  std::string hostname;
  std::string cpu_model;
  unsigned hardware_threads = 0;
  std::string topology;  ///< one-line topology summary
  std::string timestamp; ///< UTC, ISO 8601
  std::string compiler;
};

HostFingerprint host_fingerprint(const Topology& topo);

struct MeasureOptions {
  int repetitions = 5;
  int warmup = 1;
};

struct Measurement {
  std::vector<double> seconds;  ///< one entry per timed repetition
  double median_seconds = 0.0;
  std::uint64_t updates_per_rep = 0;
  double mlups = 0.0;
  bool pinned = false;
  std::vector<std::string> warnings;
};

/// Median; the mean of the two middle values for even counts. Config error
/// on an empty list.
double median(std::vector<double> values);

/// updates / seconds / 1e6. Domain error unless seconds > 0.
double mlups(std::uint64_t updates, double seconds);

/// Smallest observable step of the steady clock, in seconds.
double timer_resolution();

/// Runs `timed_run` warmup times without recording, then `repetitions` times,
/// collecting the seconds each call reports. Config error for
/// repetitions < 1 or warmup < 0. Warns when the timer resolution exceeds 1%
/// of the median repetition.
Measurement measure(const std::function<double()>& timed_run,
                    std::uint64_t updates_per_rep, MeasureOptions opts = {});

/// Times run_sweeps on a fresh copy of `input` per repetition. The result
/// grid of the last repetition is moved into `last_output` when given.
Measurement measure_plan(const SweepPlan& plan, const Grid3D& input,
                         MeasureOptions opts = {}, Grid3D* last_output = nullptr);

// STREAM triad a[i] = b[i] + s * c[i].

inline constexpr double kTriadBytesNt = 24.0;
inline constexpr double kTriadBytesWriteAllocate = 32.0;

struct StreamOptions {
  int threads = 1;
  std::size_t elements = 0;
  bool nt_stores = true;
  int repetitions = 5;
  /// When set, elements must cover at least 4x this many bytes per array.
  std::optional<std::uint64_t> outer_cache_bytes;
  std::vector<int> pinning;
};

struct StreamResult {
  double bandwidth = 0.0;  ///< bytes per second, from the median repetition
  double bytes_per_element = 0.0;
  std::vector<double> seconds;
  bool nt_stores = false;  ///< streaming stores actually used
  bool validated = false;
  bool pinned = false;
  std::vector<std::string> warnings;
};

/// Config error for zero elements, threads < 1, repetitions < 1, or arrays
/// smaller than 4x the given cache. Falls back to ordinary stores with a
/// warning if streaming stores are unavailable. The result arrays are checked
/// afterwards; a mismatch throws a domain error.
StreamResult stream_triad(const StreamOptions& opts);

/// Elements per array for a triad run that defeats the cache: 4x the outer
/// cache (divided by 8 bytes), at least 2^21, capped by `max_bytes` total.
std::size_t default_stream_elements(std::optional<std::uint64_t> outer_cache_bytes,
                                    std::uint64_t max_bytes);

}  // namespace stencilwave
