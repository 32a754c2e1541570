#pragma once

// Whittle approximate maximum likelihood for fractional Gaussian noise.

#include <boost/math/tools/minima.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimate.hpp"
#include "hurstlab/periodogram.hpp"

namespace hurstlab {

namespace detail {

// exp(x) for |x| < 700 to within 2 ulp. The Whittle inner loop is dominated by
// exponentials and libm's exp does not inline; this one does.
inline double exp_moderate(double x) {
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 0x1.8p52;
  const double t = x * kLog2e + kShifter;
  const double n = t - kShifter;
  const double r = (x - n * kLn2Hi) - n * kLn2Lo;
  // Taylor series of e^r on |r| <= ln2/2.
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::uint64_t bits =
      (std::bit_cast<std::uint64_t>(t) - std::bit_cast<std::uint64_t>(kShifter) + 1023) << 52;
  return p * std::bit_cast<double>(bits);
}

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Euler-Maclaurin estimate of sum_{j >= m} (2 pi j + shift)^{-a}.
inline double alias_tail(double a, double shift, std::size_t m) {
  const double u = kTwoPi * static_cast<double>(m) + shift;
  const double pow_u = std::pow(u, -a);
  const double integral = u * pow_u / (kTwoPi * (a - 1.0));
  const double d1 = -a * kTwoPi * pow_u / u;
  const double d3 = -a * (a + 1.0) * (a + 2.0) * kTwoPi * kTwoPi * kTwoPi * pow_u / (u * u * u);
  return integral + 0.5 * pow_u - d1 / 12.0 + d3 / 720.0;
}

// sum over j != 0 of |lambda + 2 pi j|^{-a}: `terms` explicit aliases on each
// side plus the analytic tail. Smooth on [0, pi].
inline double alias_remainder(double a, double lambda, std::size_t terms) {
  double s = 0.0;
  for (std::size_t j = terms; j >= 1; --j) {
    const double base = kTwoPi * static_cast<double>(j);
    s += std::pow(base + lambda, -a) + std::pow(base - lambda, -a);
  }
  return s + alias_tail(a, lambda, terms + 1) + alias_tail(a, -lambda, terms + 1);
}

}  // namespace detail

/// Shape of the fGn spectral density, (1 - cos l) * sum_j |l + 2 pi j|^{-2H-1},
/// without the H-dependent constant (the Whittle objective profiles scale out).
inline double fgn_spectral_density(double hurst, double frequency, std::size_t terms = 200) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must be in (0,1)");
  if (!(frequency > 0.0 && frequency <= std::numbers::pi)) throw DomainError("frequency must be in (0,pi]");
  const double a = 2.0 * hurst + 1.0;
  return (1.0 - std::cos(frequency)) * (std::pow(frequency, -a) + detail::alias_remainder(a, frequency, terms));
}

namespace detail {

// Profiled Whittle contrast on a fixed frequency grid:
//   Q(H) = n log( mean_j I_j / f_j ) + sum_j log f_j.
// The alias remainder is smooth in frequency, so each evaluation computes it
// at Chebyshev nodes only and interpolates to the grid.
class WhittleObjective {
 public:
  static constexpr std::size_t kNodes = 14;

  WhittleObjective(std::span<const PeriodogramPoint> pgram, std::size_t terms) : terms_(terms) {
    const std::size_t n = pgram.size();
    if (n < 2) throw DomainError("Whittle objective needs at least two frequencies");
    log_freq_.resize(n);
    reduced_power_.resize(n);
    cheb_x_.resize(n);
    double any_power = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double lam = pgram[j].frequency;
      const double taper = 1.0 - std::cos(lam);
      log_freq_[j] = std::log(lam);
      sum_log_freq_ += log_freq_[j];
      reduced_power_[j] = pgram[j].power / taper;
      sum_log_taper_ += std::log(taper);
      cheb_x_[j] = 2.0 * lam / std::numbers::pi - 1.0;
      any_power = std::max(any_power, pgram[j].power);
    }
    if (!(any_power > 0.0)) throw DegenerateSeries("periodogram is identically zero");
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double x = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / kNodes);
      node_freq_[k] = 0.5 * std::numbers::pi * (1.0 + x);
      for (std::size_t j = terms_; j >= 1; --j) {
        const double base = kTwoPi * static_cast<double>(j);
        node_alias_logs_.push_back(std::log(base + node_freq_[k]));
        node_alias_logs_.push_back(std::log(base - node_freq_[k]));
      }
      for (std::size_t m = 0; m < kNodes; ++m)
        dct_[m][k] = std::cos(std::numbers::pi * static_cast<double>(m) * (static_cast<double>(k) + 0.5) / kNodes);
    }
  }

  double operator()(double hurst) const { return evaluate(hurst).objective; }

  // Profile scale: the multiplier of the density shape that best fits I.
  double scale(double hurst) const { return evaluate(hurst).scale; }

  std::size_t size() const noexcept { return log_freq_.size(); }

 private:
  struct Value {
    double objective;
    double scale;
  };

  Value evaluate(double hurst) const {
    const double a = 2.0 * hurst + 1.0;
    std::array<double, kNodes> coef{};
    {
      std::array<double, kNodes> at_node{};
      for (std::size_t k = 0; k < kNodes; ++k) {
        // Same sum as alias_remainder, reusing the logs of the alias offsets.
        const double* logs = node_alias_logs_.data() + k * 2 * terms_;
        double sum = 0.0;
        for (std::size_t i = 0; i < 2 * terms_; ++i) sum += exp_moderate(-a * logs[i]);
        at_node[k] = sum + alias_tail(a, node_freq_[k], terms_ + 1) + alias_tail(a, -node_freq_[k], terms_ + 1);
      }
      for (std::size_t m = 0; m < kNodes; ++m) {
        double c = 0.0;
        for (std::size_t k = 0; k < kNodes; ++k) c += at_node[k] * dct_[m][k];
        coef[m] = 2.0 * c / kNodes;
      }
      coef[0] *= 0.5;
    }

    // f_j / taper_j = lam^{-a} (1 + u_j), u_j = lam^a * remainder_j. Points are
    // processed in fixed-size chunks so the Clenshaw recurrence vectorizes.
    const std::size_t n = log_freq_.size();
    double ratio_sum = 0.0;
    double log_sum = 0.0;
    constexpr std::size_t kChunk = 64;
    std::array<double, kChunk> b1, b2, x2;
    for (std::size_t start = 0; start < n; start += kChunk) {
      const std::size_t len = std::min(kChunk, n - start);
      for (std::size_t i = 0; i < len; ++i) {
        b1[i] = 0.0;
        b2[i] = 0.0;
        x2[i] = 2.0 * cheb_x_[start + i];
      }
      for (std::size_t m = kNodes - 1; m >= 1; --m) {
        const double c = coef[m];
        for (std::size_t i = 0; i < len; ++i) {
          const double t = x2[i] * b1[i] - b2[i] + c;
          b2[i] = b1[i];
          b1[i] = t;
        }
      }
      std::array<double, kChunk> lam_a, ratio, one_plus_u;
      for (std::size_t i = 0; i < len; ++i) lam_a[i] = exp_moderate(a * log_freq_[start + i]);
      for (std::size_t i = 0; i < len; ++i) {
        const double remainder = 0.5 * x2[i] * b1[i] - b2[i] + coef[0];
        one_plus_u[i] = 1.0 + lam_a[i] * remainder;
        ratio[i] = reduced_power_[start + i] * lam_a[i] / one_plus_u[i];
      }
      // 1 + u stays within [1, ~3], so chunk products cannot overflow.
      std::array<double, 4> prod{1.0, 1.0, 1.0, 1.0};
      std::array<double, 4> acc{};
      std::size_t i = 0;
      for (; i + 4 <= len; i += 4) {
        for (std::size_t k = 0; k < 4; ++k) {
          prod[k] *= one_plus_u[i + k];
          acc[k] += ratio[i + k];
        }
      }
      for (; i < len; ++i) {
        prod[0] *= one_plus_u[i];
        acc[0] += ratio[i];
      }
      ratio_sum += (acc[0] + acc[1]) + (acc[2] + acc[3]);
      log_sum += std::log((prod[0] * prod[1]) * (prod[2] * prod[3]));
    }
    const double dn = static_cast<double>(n);
    const double scale = ratio_sum / dn;
    const double objective = dn * std::log(scale) - a * sum_log_freq_ + log_sum + sum_log_taper_;
    return {objective, scale};
  }

  std::size_t terms_;
  std::vector<double> log_freq_;
  std::vector<double> reduced_power_;
  std::vector<double> cheb_x_;
  std::array<double, kNodes> node_freq_{};
  std::array<std::array<double, kNodes>, kNodes> dct_{};
  std::vector<double> node_alias_logs_;  // log(2 pi j +- node), kNodes x 2 terms
  double sum_log_freq_ = 0.0;
  double sum_log_taper_ = 0.0;
};

inline constexpr double kWhittleLow = 0.01;
inline constexpr double kWhittleHigh = 0.99;

}  // namespace detail

/// Minimizes the profiled Whittle contrast for the given periodogram ordinates.
/// Exposed separately from estimate_whittle so the contrast can be driven by
/// exact spectra.
inline HurstEstimate whittle_fit(std::span<const PeriodogramPoint> pgram, const EstimatorConfig& config = {}) {
  config.validate();
  const detail::WhittleObjective objective(pgram, config.whittle_spectrum_terms);

  // Brent stops once the bracket half-width is within ~2.5 * tol for |H| <= 1.
  const double tol = config.whittle_tolerance / 2.5;
  const int bits = std::max(4, static_cast<int>(std::ceil(1.0 - std::log2(tol))));
  constexpr std::uintmax_t kMaxIter = 200;
  std::uintmax_t iterations = kMaxIter;
  const auto [h_min, q_min] = boost::math::tools::brent_find_minima(objective, detail::kWhittleLow,
                                                                    detail::kWhittleHigh, bits, iterations);
  if (iterations >= kMaxIter || !std::isfinite(q_min))
    throw NoConvergence("Whittle search did not isolate a minimum");

  HurstEstimate est;
  est.method = Method::Whittle;
  est.value = h_min;
  const bool at_edge = h_min - detail::kWhittleLow < 2.0 * config.whittle_tolerance ||
                       detail::kWhittleHigh - h_min < 2.0 * config.whittle_tolerance;
  est.diagnostics[diag::kClamped] = at_edge ? 1.0 : 0.0;
  est.diagnostics[diag::kObjective] = q_min;
  est.diagnostics[diag::kScale] = objective.scale(h_min);
  est.diagnostics[diag::kPoints] = static_cast<double>(objective.size());
  est.diagnostics[diag::kIterations] = static_cast<double>(iterations);

  // Observed information from a central second difference of Q.
  constexpr double step = 1e-3;
  const double centre = std::clamp(h_min, detail::kWhittleLow + step, detail::kWhittleHigh - step);
  const double q_centre = centre == h_min ? q_min : objective(centre);
  const double curvature = (objective(centre + step) - 2.0 * q_centre + objective(centre - step)) / (step * step);
  est.diagnostics[diag::kCurvature] = curvature;
  if (curvature > 0.0) detail::set_ci(est, detail::kZ95 / std::sqrt(curvature));
  return est;
}

inline HurstEstimate estimate_whittle(std::span<const double> series, const EstimatorConfig& config = {}) {
  if (series.size() < 64) throw DomainError("Whittle estimator needs at least 64 points");
  const auto pgram = periodogram_of(series);
  return whittle_fit(pgram, config);
}

}  // namespace hurstlab
