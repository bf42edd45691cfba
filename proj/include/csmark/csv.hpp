#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace csmark {

//! Shortest decimal that parses back to exactly `x`.
inline std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline bool parse_double(const std::string& text, double& out)
{
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

} // namespace csmark
