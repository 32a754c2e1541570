#pragma once

// Packet-capture ingestion and sliding-window Hurst estimation over long traces.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimators.hpp"
#include "hurstlab/parallel.hpp"
#include "hurstlab/series_io.hpp"

namespace hurstlab {

struct PacketRecord {
  double timestamp = 0.0;  // seconds at the capture point
  std::uint64_t size = 0;  // frame length in bytes
};

enum class Unit { Bytes, Frames };

inline std::string_view to_string(Unit u) { return u == Unit::Bytes ? "bytes" : "frames"; }

inline Unit parse_unit(std::string_view s) {
  if (s == "bytes") return Unit::Bytes;
  if (s == "frames") return Unit::Frames;
  throw DomainError("unit must be 'bytes' or 'frames'");
}

struct BinnedSeries {
  double bin_width = 0.0;
  double origin = 0.0;
  std::vector<double> values;
  Unit unit = Unit::Bytes;
};

inline constexpr std::string_view kCaptureHeader = "timestamp,bytes";

/// Reads "timestamp,bytes" CSV and returns the records sorted by time.
inline std::vector<PacketRecord> parse_capture_csv(std::istream& in) {
  std::vector<PacketRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (!header_seen) {
      if (text != kCaptureHeader) throw ParseError(line_no, "expected header 'timestamp,bytes'");
      header_seen = true;
      continue;
    }
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated fields");
    const auto ts = detail::parse_double(text.substr(0, comma));
    if (!ts || !std::isfinite(*ts) || *ts < 0.0)
      throw ParseError(line_no, "timestamp must be a non-negative number");
    const auto field = detail::trim(text.substr(comma + 1));
    std::uint64_t size = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), size);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || size == 0)
      throw ParseError(line_no, "bytes must be a positive integer");
    records.push_back({*ts, size});
  }
  if (!header_seen) throw ParseError(1, "expected header 'timestamp,bytes'");
  if (records.empty()) throw EmptyCapture("capture contains no records");
  std::stable_sort(records.begin(), records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
  return records;
}

/// Bins are aligned to multiples of the bin width on the capture clock:
/// bin k covers [origin + k w, origin + (k+1) w) with origin = floor(t_first / w) w.
/// The series runs from the bin of the first record to the bin of the last.
inline BinnedSeries bin_to_series(std::span<const PacketRecord> records, double bin_width, Unit unit) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("bin width must be positive");
  if (records.empty()) throw EmptyCapture("no records to bin");
  double first = records.front().timestamp;
  double last = first;
  for (const auto& r : records) {
    first = std::min(first, r.timestamp);
    last = std::max(last, r.timestamp);
  }
  const double first_bin = std::floor(first / bin_width);
  const auto bin_of = [&](double t) { return static_cast<std::size_t>(std::floor(t / bin_width) - first_bin); };
  BinnedSeries out;
  out.bin_width = bin_width;
  out.origin = first_bin * bin_width;
  out.unit = unit;
  out.values.assign(bin_of(last) + 1, 0.0);
  for (const auto& r : records)
    out.values[bin_of(r.timestamp)] += unit == Unit::Bytes ? static_cast<double>(r.size) : 1.0;
  return out;
}

struct WindowPoint {
  std::size_t start_index = 0;
  std::optional<HurstEstimate> estimate;
  std::string reason;  // why the estimate is absent
};

struct WindowScan {
  std::size_t window_length = 0;
  std::size_t stride = 0;
  std::vector<WindowPoint> points;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](auto& p) { return !p.estimate; }));
  }
};

/// Number of windows [i*stride, i*stride + window) that fit in `length` samples.
inline std::size_t window_count(std::size_t length, std::size_t window, std::size_t stride) {
  return length < window ? 0 : (length - window) / stride + 1;
}

inline WindowScan sliding_window_scan(std::span<const double> series, std::size_t window, std::size_t stride,
                                      Method method, const EstimatorConfig& config = {}, unsigned threads = 1) {
  if (window == 0 || window > series.size()) throw DomainError("window must be in [1, series length]");
  if (stride == 0 || stride >= window)
    throw DomainError("stride must satisfy 1 <= stride < window (consecutive windows must overlap)");
  config.validate();
  WindowScan scan;
  scan.window_length = window;
  scan.stride = stride;
  scan.points.resize(window_count(series.size(), window, stride));
  detail::parallel_for(scan.points.size(), threads, [&](std::size_t i) {
    auto& p = scan.points[i];
    p.start_index = i * stride;
    try {
      p.estimate = estimate(method, series.subspan(p.start_index, window), config);
    } catch (const Error& e) {
      p.reason = e.what();
    }
  });
  return scan;
}

inline std::string_view scan_status(const WindowPoint& p) {
  if (!p.estimate) return "failed";
  auto it = p.estimate->diagnostics.find(diag::kClamped);
  return (it != p.estimate->diagnostics.end() && it->second != 0.0) ? "clamped" : "ok";
}

/// t_start_seconds is origin + start_index * bin_width.
inline void write_scan_csv(std::ostream& out, const WindowScan& scan, double origin = 0.0, double bin_width = 1.0) {
  out << "t_start_index,t_start_seconds,H,ci_low,ci_high,status\n";
  for (const auto& p : scan.points) {
    out << p.start_index << ','
        << detail::format_double(origin + static_cast<double>(p.start_index) * bin_width) << ',';
    if (p.estimate) {
      out << detail::format_double(p.estimate->value) << ',';
      if (p.estimate->ci_low) out << detail::format_double(*p.estimate->ci_low);
      out << ',';
      if (p.estimate->ci_high) out << detail::format_double(*p.estimate->ci_high);
      out << ',' << scan_status(p) << '\n';
    } else {
      out << ",,," << scan_status(p) << '\n';
    }
  }
}

}  // namespace hurstlab
