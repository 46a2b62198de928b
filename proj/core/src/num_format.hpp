#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace emoc::detail {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

// JSON-number text for a double: integral values print without a fraction
// part ("12600", not "12600.0"); -0.0 keeps its sign via the general path.
inline std::string format_number(double v) {
  if (std::trunc(v) == v && std::abs(v) < 9.0e15 && !(v == 0.0 && std::signbit(v))) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(v));
    (void)ec;
    return std::string(buf, end);
  }
  return format_double(v);
}

// Rounds to n significant decimal digits (n in 1..17).
inline double round_sig(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

}  // namespace emoc::detail
