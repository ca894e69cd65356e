#include "stencilwave/error.hpp"

namespace stencilwave {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::resource: return "resource";
    case ErrorCode::bounds: return "bounds";
    case ErrorCode::shape: return "shape";
    case ErrorCode::aliasing: return "aliasing";
    case ErrorCode::config: return "config";
    case ErrorCode::partition: return "partition";
    case ErrorCode::plan: return "plan";
    case ErrorCode::domain: return "domain";
    case ErrorCode::pinning: return "pinning";
    case ErrorCode::placement: return "placement";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + " error: " + what);
}

}  // namespace stencilwave
