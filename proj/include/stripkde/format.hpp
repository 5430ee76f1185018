#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stripkde {

//! Shortest decimal that round-trips, locale independent.
inline std::string
format_shortest(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

//! 17 significant digits, '.' decimal separator, locale independent.
inline std::string
format_g17(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

//! Parses a full string as a double; throws std::invalid_argument otherwise.
inline double
parse_double(std::string_view s)
{
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

} // namespace stripkde
