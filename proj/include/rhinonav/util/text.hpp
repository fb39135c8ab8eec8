#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rhinonav/util/error.hpp"

namespace rhinonav {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits on '\n', dropping a trailing '\r' from each line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (nl == std::string_view::npos) {
      if (!line.empty()) {
        lines.push_back(line);
      }
      break;
    }
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view s, std::string_view seps = " \t") {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = s.find_first_not_of(seps, i);
    if (b == std::string_view::npos) {
      break;
    }
    const auto e = s.find_first_of(seps, b);
    out.push_back(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
    if (e == std::string_view::npos) {
      break;
    }
    i = e;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t lineno = 0) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(lineno, "invalid number '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_integer(std::string_view s, std::size_t lineno = 0) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(lineno, "invalid integer '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<double> parse_doubles(std::string_view s, std::size_t lineno = 0,
                                         std::string_view seps = " \t") {
  std::vector<double> out;
  for (std::string_view f : split_fields(s, seps)) {
    out.push_back(parse_double(f, lineno));
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::invalid_argument, "cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rhinonav
