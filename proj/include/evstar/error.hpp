#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evstar {

enum class Errc {
  invalid_argument,
  parse,
  duplicate,
  out_of_range,
  ordering,
  insufficient_data,
  degenerate,
  empty_table,
  empty_alignment,
  clock_skew,
  lost_in_space,
  io,
  config,
};

std::string_view to_string(Errc code);

// Every library failure is reported as an evstar::Error carrying a code the
// CLI maps to an exit status.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace evstar
