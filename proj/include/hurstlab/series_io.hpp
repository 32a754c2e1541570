#pragma once

// Series CSV: one value per line, with an optional leading "value" header.

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hurstlab/core.hpp"

namespace hurstlab {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline TimeSeries read_series_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (line_no == 1 && text == "value") continue;
    const auto v = detail::parse_double(text);
    if (!v) throw ParseError(line_no, "not a number: '" + std::string(text) + "'");
    if (!std::isfinite(*v)) throw ParseError(line_no, "value is not finite");
    values.push_back(*v);
  }
  if (values.empty()) throw DomainError("series file contains no values");
  return TimeSeries(std::move(values));
}

inline void write_series_csv(std::ostream& out, std::span<const double> series, bool header = false) {
  if (header) out << "value\n";
  for (double v : series) out << detail::format_double(v) << '\n';
}

}  // namespace hurstlab
