#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimate.hpp"
#include "hurstlab/fft.hpp"

namespace hurstlab {

struct PeriodogramPoint {
  double frequency;
  double power;
};

/// I(l_j) = |sum_t (x_t - mean) e^{-i t l_j}|^2 / (2 pi N) at the Fourier
/// frequencies l_j = 2 pi j / N, j = 1 .. floor((N-1)/2). A constant series
/// yields all-zero powers; estimators reject that downstream.
inline std::vector<PeriodogramPoint> periodogram_of(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 16) throw DomainError("periodogram needs at least 16 points");
  const double mu = detail::mean(series);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mu;
  const auto spectrum = fft::forward_real(centered);
  const std::size_t count = (n - 1) / 2;
  const double norm = 1.0 / (2.0 * std::numbers::pi * static_cast<double>(n));
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::vector<PeriodogramPoint> out(count);
  for (std::size_t j = 1; j <= count; ++j)
    out[j - 1] = {step * static_cast<double>(j), std::norm(spectrum[j]) * norm};
  return out;
}

/// Log-log regression of the periodogram over its lowest frequencies. The
/// slope s estimates 1 - 2H.
inline HurstEstimate estimate_periodogram(std::span<const double> series,
                                          const EstimatorConfig& config = {}) {
  config.validate();
  if (series.size() < 64) throw DomainError("periodogram estimator needs at least 64 points");
  const auto pgram = periodogram_of(series);
  const auto frac = static_cast<std::size_t>(config.pgram_low_fraction * static_cast<double>(pgram.size()));
  const std::size_t use = std::min(pgram.size(), std::max<std::size_t>(3, frac));

  std::vector<double> x, y;
  x.reserve(use);
  y.reserve(use);
  for (std::size_t j = 0; j < use; ++j) {
    if (pgram[j].power > 0.0) {
      x.push_back(std::log(pgram[j].frequency));
      y.push_back(std::log(pgram[j].power));
    }
  }
  if (x.size() < 2) throw DegenerateSeries("periodogram is zero at the selected frequencies");

  const auto fit = detail::fit_line(x, y);
  HurstEstimate est;
  est.method = Method::Periodogram;
  detail::set_clamped_value(est, 0.5 * (1.0 - fit.slope));
  est.diagnostics[diag::kSlope] = fit.slope;
  est.diagnostics[diag::kIntercept] = fit.intercept;
  est.diagnostics[diag::kPoints] = static_cast<double>(fit.points);
  est.diagnostics[diag::kCorrelation] = fit.r;
  if (fit.points > 2) detail::set_ci(est, detail::kZ95 * 0.5 * fit.slope_se);
  return est;
}

}  // namespace hurstlab
