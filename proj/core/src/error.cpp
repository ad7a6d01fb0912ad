#include "sdforest/error.hpp"

namespace sdf {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::file_not_found: return "file not found";
    case Errc::malformed_png: return "malformed PNG";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::bad_magic: return "bad magic";
    case Errc::unsupported_version: return "unsupported version";
    case Errc::payload_mismatch: return "payload length mismatch";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::degenerate_data: return "degenerate data";
    case Errc::io_error: return "I/O error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sdf
