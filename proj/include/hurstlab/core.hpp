#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hurstlab {

inline constexpr std::string_view kVersion = "0.1.0";

// Error hierarchy. Everything the library throws derives from Error so callers
// can map failures to exit codes without knowing every subtype.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition or parameter-range violation.
struct DomainError : Error {
  using Error::Error;
};

// Circulant embedding has a negative eigenvalue beyond roundoff.
struct EmbeddingNotPsd : Error {
  using Error::Error;
};

// Data that cannot carry a scaling estimate (constant blocks, all-zero spectrum).
struct DegenerateSeries : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct EmptyCapture : Error {
  using Error::Error;
};

/// Finite, non-empty, uniformly sampled real sequence.
class TimeSeries {
 public:
  TimeSeries() = default;

  explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("time series must have at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]))
        throw DomainError("time series value " + std::to_string(i) + " is not finite");
    }
  }

  TimeSeries(std::initializer_list<double> values) : TimeSeries(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
};

namespace detail {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Ordinary or weighted least-squares line fit y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;          // Pearson correlation (weighted when weights given)
  double slope_se = 0.0;   // residual-based standard error of the slope
  double sxx = 0.0;        // (weighted) centered sum of squares of x
  std::size_t points = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w = {}) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || (!w.empty() && w.size() != n))
    throw DomainError("line fit needs at least two matching points");
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    mx += wi * x[i];
    my += wi * y[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += wi * dx * dx;
    sxy += wi * dx * dy;
    syy += wi * dy * dy;
  }
  if (!(sxx > 0.0)) throw DomainError("line fit needs at least two distinct abscissae");
  LineFit fit;
  fit.points = n;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w.empty() ? 1.0 : w[i];
      const double e = y[i] - fit.intercept - fit.slope * x[i];
      rss += wi * e * e;
    }
    // Weights are relative; their scale cancels between rss and sxx.
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace detail
}  // namespace hurstlab
