#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace qdecomp {

// Shortest decimal string that round-trips to the same double; locale-free
// so that output files are byte-stable across runs and platforms.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace qdecomp
