#pragma once

// Orthonormal Daubechies pyramid transform with periodic boundaries, and the
// wavelet (log-scale diagram) Hurst estimator built on it.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimate.hpp"

namespace hurstlab {

namespace detail {

// Minimum-phase Daubechies scaling filters, sum = sqrt(2), unit energy.
inline constexpr std::array<double, 2> kDb1 = {0.70710678118654752440, 0.70710678118654752440};
inline constexpr std::array<double, 4> kDb2 = {0.48296291314453414337, 0.83651630373780790558,
                                               0.22414386804201338103, -0.12940952255126038117};
inline constexpr std::array<double, 6> kDb3 = {0.33267055295008261600,  0.80689150931109257649,
                                               0.45987750211849157010,  -0.13501102001025458870,
                                               -0.08544127388202666169, 0.03522629188570953660};
inline constexpr std::array<double, 8> kDb4 = {
    0.23037781330889650086,  0.71484657055291564709,  0.63088076792985890788,
    -0.02798376941685985421, -0.18703481171909308408, 0.03084138183556076363,
    0.03288301166688519974,  -0.01059740178506903211};
inline constexpr std::array<double, 10> kDb5 = {
    0.16010239797419291448,  0.60382926979718967054,  0.72430852843777292773,
    0.13842814590132073151,  -0.24229488706638203186, -0.03224486958463837465,
    0.07757149384004571352,  -0.00624149021279827427, -0.01258075199908199947,
    0.00333572528547377128};
inline constexpr std::array<double, 12> kDb6 = {
    0.11154074335010946362,  0.49462389039845308568,  0.75113390802109535068,
    0.31525035170919762909,  -0.22626469396543982008, -0.12976686756726193556,
    0.09750160558732304910,  0.02752286553030572863,  -0.03158203931748602957,
    0.00055384220116149614,  0.00477725751094551064,  -0.00107730108530847956};
inline constexpr std::array<double, 14> kDb7 = {
    0.07785205408500917902,  0.39653931948191730654,  0.72913209084623511992,
    0.46978228740519312247,  -0.14390600392856497541, -0.22403618499387498264,
    0.07130921926683026475,  0.08061260915108307191,  -0.03802993693501441358,
    -0.01657454163066688065, 0.01255099855609984061,  0.00042957797292136652,
    -0.00180164070404749092, 0.00035371379997452025};
inline constexpr std::array<double, 16> kDb8 = {
    0.05441584224310400996,  0.31287159091429997066,  0.67563073629728980681,
    0.58535468365420671277,  -0.01582910525634930567, -0.28401554296154692652,
    0.00047248457391328277,  0.12874742662047845886,  -0.01736930100180754617,
    -0.04408825393079475151, 0.01398102791739828165,  0.00874609404740577672,
    -0.00487035299345157431, -0.00039174037337694705, 0.00067544940645056937,
    -0.00011747678412476953};

}  // namespace detail

/// Scaling (low-pass) filter of the Daubechies wavelet with the given number
/// of vanishing moments (1..8).
inline std::span<const double> daubechies_filter(std::size_t vanishing_moments) {
  switch (vanishing_moments) {
    case 1: return detail::kDb1;
    case 2: return detail::kDb2;
    case 3: return detail::kDb3;
    case 4: return detail::kDb4;
    case 5: return detail::kDb5;
    case 6: return detail::kDb6;
    case 7: return detail::kDb7;
    case 8: return detail::kDb8;
    default:
      throw DomainError("Daubechies filters are available for 1..8 vanishing moments, got " +
                        std::to_string(vanishing_moments));
  }
}

/// details[0] is the finest octave (j = 1).
struct WaveletDecomposition {
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
};

namespace detail {

inline double wavelet_tap(std::span<const double> h, std::size_t n) {
  const double v = h[h.size() - 1 - n];
  return (n % 2 == 0) ? v : -v;
}

// One analysis step on an even-length signal with periodic wrap.
inline void analysis_step(std::span<const double> x, std::span<const double> h, std::vector<double>& approx,
                          std::vector<double>& detail) {
  const std::size_t len = x.size();
  const std::size_t half = len / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n) {
      const double v = x[(2 * k + n) % len];
      a += h[n] * v;
      d += wavelet_tap(h, n) * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

inline std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                          std::span<const double> h) {
  const std::size_t half = approx.size();
  const std::size_t len = 2 * half;
  std::vector<double> x(len, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t n = 0; n < h.size(); ++n) {
      x[(2 * k + n) % len] += h[n] * approx[k] + wavelet_tap(h, n) * detail[k];
    }
  }
  return x;
}

}  // namespace detail

/// Periodic pyramid DWT with `levels` octaves. The length must be divisible by 2^levels.
inline WaveletDecomposition dwt_forward(std::span<const double> x, std::size_t vanishing_moments,
                                        std::size_t levels) {
  const auto h = daubechies_filter(vanishing_moments);
  if (levels == 0 || levels >= 63 || x.size() % (std::size_t{1} << levels) != 0)
    throw DomainError("series length must be divisible by 2^levels");
  WaveletDecomposition out;
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> approx, detail;
  for (std::size_t j = 0; j < levels; ++j) {
    detail::analysis_step(current, h, approx, detail);
    out.details.push_back(std::move(detail));
    current.swap(approx);
  }
  out.approximation = std::move(current);
  return out;
}

inline std::vector<double> dwt_inverse(const WaveletDecomposition& dec, std::size_t vanishing_moments) {
  const auto h = daubechies_filter(vanishing_moments);
  std::vector<double> current = dec.approximation;
  for (std::size_t j = dec.details.size(); j-- > 0;) {
    if (dec.details[j].size() != current.size()) throw DomainError("inconsistent wavelet decomposition");
    current = detail::synthesis_step(current, dec.details[j], h);
  }
  return current;
}

struct ScaleVariance {
  std::size_t scale;  // octave j, 1 = finest
  double variance;    // mean squared detail coefficient
  std::size_t count;  // number of coefficients n_j
};

/// Per-octave mean squared detail coefficients. The pyramid runs while the
/// approximation is at least one filter length long; an odd-length level drops
/// its last sample. Octaves with fewer than wavelet_min_coeffs coefficients are
/// excluded.
inline std::vector<ScaleVariance> dwt_detail_variances(std::span<const double> series,
                                                       const EstimatorConfig& config = {}) {
  config.validate();
  const auto h = daubechies_filter(config.wavelet_vanishing_moments);
  if (config.wavelet_min_scale + 2 >= 63 || series.size() < (std::size_t{1} << (config.wavelet_min_scale + 2)))
    throw DomainError("series too short for the wavelet estimator");

  std::vector<ScaleVariance> out;
  std::vector<double> current(series.begin(), series.end());
  std::vector<double> approx, detail;
  for (std::size_t j = 1; current.size() >= std::max<std::size_t>(h.size(), 2); ++j) {
    if (current.size() % 2 != 0) current.pop_back();
    detail::analysis_step(current, h, approx, detail);
    if (detail.size() >= config.wavelet_min_coeffs) {
      double ss = 0.0;
      for (double d : detail) ss += d * d;
      out.push_back({j, ss / static_cast<double>(detail.size()), detail.size()});
    }
    current.swap(approx);
  }
  if (out.size() < 3) throw DomainError("fewer than 3 usable wavelet scales");
  return out;
}

/// Weighted regression of log2 mu_j on j; the slope estimates 2H - 1. The fit
/// starts at wavelet_min_scale, moved down when needed to keep three octaves.
inline HurstEstimate estimate_abry_veitch(std::span<const double> series, const EstimatorConfig& config = {}) {
  const auto scales = dwt_detail_variances(series, config);
  const std::size_t j_max = scales.back().scale;
  const std::size_t j_min = std::min(config.wavelet_min_scale, j_max >= 3 ? j_max - 2 : std::size_t{1});

  std::vector<double> x, y, w;
  for (const auto& s : scales) {
    if (s.scale < j_min) continue;
    if (!(s.variance > 0.0)) throw DegenerateSeries("zero wavelet detail energy at octave " + std::to_string(s.scale));
    x.push_back(static_cast<double>(s.scale));
    y.push_back(std::log2(s.variance));
    w.push_back(static_cast<double>(s.count));
  }
  const auto fit = detail::fit_line(x, y, w);

  HurstEstimate est;
  est.method = Method::AbryVeitch;
  detail::set_clamped_value(est, 0.5 * (fit.slope + 1.0));
  est.diagnostics[diag::kSlope] = fit.slope;
  est.diagnostics[diag::kIntercept] = fit.intercept;
  est.diagnostics[diag::kPoints] = static_cast<double>(fit.points);
  est.diagnostics[diag::kCorrelation] = fit.r;
  est.diagnostics[diag::kScaleMin] = x.front();
  est.diagnostics[diag::kScaleMax] = x.back();
  // Var(log2 mu_j) ~ 2 / (n_j ln^2 2) for Gaussian details; with weights n_j the
  // slope variance reduces to that constant over the weighted sxx.
  const double slope_var = 2.0 / (std::numbers::ln2 * std::numbers::ln2) / fit.sxx;
  detail::set_ci(est, detail::kZ95 * 0.5 * std::sqrt(slope_var));
  return est;
}

}  // namespace hurstlab
