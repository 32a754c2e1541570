#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimate.hpp"

namespace hurstlab {

namespace detail {

// Logarithmically spaced block sizes from min_block to n/2 inclusive.
inline std::vector<std::size_t> rs_block_sizes(std::size_t n, std::size_t min_block,
                                               std::size_t per_decade) {
  std::vector<std::size_t> sizes;
  const std::size_t top = n / 2;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(min_block) *
                     std::pow(10.0, static_cast<double>(k) / static_cast<double>(per_decade));
    const auto size = static_cast<std::size_t>(std::llround(s));
    if (size > top) break;
    if (sizes.empty() || size != sizes.back()) sizes.push_back(size);
  }
  return sizes;
}

// Average R/S over the non-overlapping blocks of length `size`.
inline double mean_rescaled_range(std::span<const double> x, std::size_t size) {
  const std::size_t blocks = x.size() / size;
  double total = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto block = x.subspan(b * size, size);
    const double mu = mean(block);
    double cum = 0.0, hi = 0.0, lo = 0.0, ss = 0.0;
    for (double v : block) {
      const double d = v - mu;
      cum += d;
      hi = std::max(hi, cum);
      lo = std::min(lo, cum);
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(size));
    if (!(sd > 0.0)) throw DegenerateSeries("R/S block has zero standard deviation");
    total += (hi - lo) / sd;
  }
  return total / static_cast<double>(blocks);
}

}  // namespace detail

/// Rescaled-range estimate: slope of log(R/S) against log(block size).
inline HurstEstimate estimate_rs(std::span<const double> series, const EstimatorConfig& config = {}) {
  config.validate();
  if (series.size() < 2 * config.rs_min_block)
    throw DomainError("R/S needs at least 2 * rs_min_block points");
  const auto sizes = detail::rs_block_sizes(series.size(), config.rs_min_block, config.rs_blocks_per_decade);
  if (sizes.size() < 2) throw DomainError("R/S needs at least two block sizes");

  std::vector<double> x, y;
  x.reserve(sizes.size());
  y.reserve(sizes.size());
  for (std::size_t size : sizes) {
    const double rs = detail::mean_rescaled_range(series, size);
    if (!(rs > 0.0)) throw DegenerateSeries("R/S statistic is zero");
    x.push_back(std::log(static_cast<double>(size)));
    y.push_back(std::log(rs));
  }
  const auto fit = detail::fit_line(x, y);
  HurstEstimate est;
  est.method = Method::RS;
  detail::set_clamped_value(est, fit.slope);
  est.diagnostics[diag::kSlope] = fit.slope;
  est.diagnostics[diag::kIntercept] = fit.intercept;
  est.diagnostics[diag::kPoints] = static_cast<double>(fit.points);
  est.diagnostics[diag::kCorrelation] = fit.r;
  return est;
}

}  // namespace hurstlab
