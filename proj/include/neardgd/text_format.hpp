#pragma once

// Round-trip-safe decimal formatting for doubles (shortest representation that
// parses back to the identical bit pattern).

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace neardgd::detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

inline long long parse_integer(std::string_view s) {
  long long v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_integer: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace neardgd::detail
