#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stencilwave/barrier.hpp"
#include "stencilwave/sweeps.hpp"

namespace stencilwave::cli {

enum ExitCode : int { kSuccess = 0, kMismatch = 1, kUsage = 2 };

struct Extent {
  Index ni = 0, nj = 0, nk = 0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// "400x200x200" -> {400, 200, 200}. Config error on malformed text; extents
/// are checked by the grid itself.
Extent parse_extent(const std::string& text);
std::string format_extent(const Extent& e);

/// Every option of every subcommand. Options that do not belong to the
/// chosen subcommand keep their defaults.
struct RunConfig {
  std::string command;  // bench, verify, stream, topo, model

  KernelKind kernel = KernelKind::jacobi;
  Variant variant = Variant::serial;
  Extent size{100, 100, 100};
  int iterations = 8;
  int groups = 1;
  int threads_per_group = 1;
  int blocks = 0;  // 0 picks the block count from the cache size
  int threads = 1;
  bool smt = false;
  std::optional<BarrierKind> barrier;  // unset picks by team size
  std::string pinning = "auto";        // auto, none, or a cpu list
  bool nt_stores = false;
  std::uint64_t seed = 42;
  int repetitions = 5;
  int warmup = 1;
  bool verify = false;
  std::string output;  // empty writes to stdout
  std::string format = "json";

  // verify
  std::optional<KernelKind> oracle_kernel;
  std::string dump;

  // bench --matrix
  bool matrix = false;
  std::vector<std::string> matrix_sizes;
  std::vector<Variant> matrix_variants;
  std::vector<int> matrix_t;

  // stream
  std::optional<std::uint64_t> elements;
  bool stream_nt = true;

  // model, and the bandwidth behind bench's predicted ceiling
  std::optional<double> bandwidth;
  std::optional<double> bytes_per_lup;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses a full command line (without the program name). Throws
/// UsageError for syntax problems; `help` receives --help text and yields a
/// config with an empty command.
struct UsageError {
  std::string message;
  int exit_code = kUsage;
};
RunConfig parse_run_config(const std::vector<std::string>& args,
                           std::string* help = nullptr);

/// The command line that parses back into `cfg`.
std::vector<std::string> to_args(const RunConfig& cfg);
std::string join_args(const std::vector<std::string>& args);

/// Entry point behind the executable. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace stencilwave::cli
