#pragma once

#include <stdexcept>
#include <string>

namespace sdf {

enum class Errc {
  file_not_found,
  malformed_png,
  unsupported_format,
  bad_magic,
  unsupported_version,
  payload_mismatch,
  invalid_argument,
  shape_mismatch,
  non_finite,
  degenerate_data,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sdf
