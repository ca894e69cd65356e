#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stencilwave {

enum class ErrorCode {
  dimension,
  resource,
  bounds,
  shape,
  aliasing,
  config,
  partition,
  plan,
  domain,
  pinning,
  placement,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. The code tells callers
/// (and the CLI's exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace stencilwave
