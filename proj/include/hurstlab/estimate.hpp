#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "hurstlab/core.hpp"

namespace hurstlab {

enum class Method { RS, Periodogram, Whittle, AbryVeitch };

inline constexpr Method kAllMethods[] = {Method::Whittle, Method::AbryVeitch, Method::Periodogram,
                                         Method::RS};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::RS: return "rs";
    case Method::Periodogram: return "periodogram";
    case Method::Whittle: return "whittle";
    case Method::AbryVeitch: return "abry-veitch";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "rs" || name == "r/s") return Method::RS;
  if (name == "periodogram" || name == "pgram") return Method::Periodogram;
  if (name == "whittle") return Method::Whittle;
  if (name == "abry-veitch" || name == "abry_veitch" || name == "av" || name == "wavelet")
    return Method::AbryVeitch;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

// Stable diagnostics keys. Not every estimator sets every key.
namespace diag {
inline constexpr const char* kSlope = "slope";
inline constexpr const char* kIntercept = "intercept";
inline constexpr const char* kPoints = "points";
inline constexpr const char* kCorrelation = "correlation";
inline constexpr const char* kClamped = "clamped";
inline constexpr const char* kObjective = "objective";
inline constexpr const char* kScale = "scale";
inline constexpr const char* kCurvature = "curvature";
inline constexpr const char* kIterations = "iterations";
inline constexpr const char* kScaleMin = "scale_min";
inline constexpr const char* kScaleMax = "scale_max";
}  // namespace diag

struct HurstEstimate {
  double value = 0.5;
  Method method = Method::Whittle;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::map<std::string, double> diagnostics;
};

struct EstimatorConfig {
  std::size_t rs_min_block = 8;
  std::size_t rs_blocks_per_decade = 8;
  double pgram_low_fraction = 0.10;
  double whittle_tolerance = 1e-4;
  std::size_t whittle_spectrum_terms = 200;
  std::size_t wavelet_vanishing_moments = 3;
  std::size_t wavelet_min_scale = 3;
  std::size_t wavelet_min_coeffs = 8;

  void validate() const {
    if (rs_min_block < 2) throw DomainError("rs_min_block must be at least 2");
    if (rs_blocks_per_decade == 0) throw DomainError("rs_blocks_per_decade must be positive");
    if (!(pgram_low_fraction > 0.0 && pgram_low_fraction <= 1.0))
      throw DomainError("pgram_low_fraction must be in (0,1]");
    if (!(whittle_tolerance > 0.0)) throw DomainError("whittle_tolerance must be positive");
    if (whittle_spectrum_terms == 0) throw DomainError("whittle_spectrum_terms must be positive");
    if (wavelet_vanishing_moments == 0 || wavelet_vanishing_moments > 8)
      throw DomainError("wavelet_vanishing_moments must be in 1..8");
    if (wavelet_min_scale == 0) throw DomainError("wavelet_min_scale must be positive");
    if (wavelet_min_coeffs == 0) throw DomainError("wavelet_min_coeffs must be positive");
  }
};

namespace detail {

inline constexpr double kClampLow = 0.001;
inline constexpr double kClampHigh = 0.999;

// Map a raw slope-derived value into (0,1), flagging when it had to move.
inline void set_clamped_value(HurstEstimate& est, double raw) {
  const double v = std::clamp(raw, kClampLow, kClampHigh);
  est.value = v;
  est.diagnostics[diag::kClamped] = (v != raw) ? 1.0 : 0.0;
}

inline void set_ci(HurstEstimate& est, double half_width) {
  if (!std::isfinite(half_width) || half_width < 0.0) return;
  est.ci_low = std::max(0.0, est.value - half_width);
  est.ci_high = std::min(1.0, est.value + half_width);
}

inline constexpr double kZ95 = 1.959963984540054;

}  // namespace detail
}  // namespace hurstlab
