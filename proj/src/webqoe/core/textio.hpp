#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "webqoe/errors.hpp"

namespace webqoe {

// Shortest decimal form that round-trips to the same double.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename Int>
Int parse_int_field(std::string_view s, long row, const char* what) {
  Int value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(row, std::string(what) + ": expected integer, got \"" + std::string(s) + "\"");
  }
  return value;
}

inline double parse_double_field(std::string_view s, long row, const char* what) {
  double value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(row, std::string(what) + ": expected number, got \"" + std::string(s) + "\"");
  }
  return value;
}

// Strips one trailing '\r' so CRLF input parses like LF input.
inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace webqoe
