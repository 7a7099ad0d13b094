#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qathermo {

/// Failure categories shared by every module. The C API maps these one-to-one
/// onto `qt_status` values.
enum class Errc {
  domain = 1,
  saturation,
  size,
  parity,
  range,
  mismatch,
  parse,
  io,
  extrapolation,
  infeasible,
  insufficient_points,
  degenerate_abscissa,
  empty_group,
  not_found,
  bipartite,
  negative_temperature,
  invalid_argument,
  buffer_too_small,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace qathermo
