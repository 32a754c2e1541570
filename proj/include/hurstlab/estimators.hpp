#pragma once

#include <span>

#include "hurstlab/estimate.hpp"
#include "hurstlab/periodogram.hpp"
#include "hurstlab/rescaled_range.hpp"
#include "hurstlab/wavelet.hpp"
#include "hurstlab/whittle.hpp"

namespace hurstlab {

inline HurstEstimate estimate(Method method, std::span<const double> series, const EstimatorConfig& config = {}) {
  switch (method) {
    case Method::RS: return estimate_rs(series, config);
    case Method::Periodogram: return estimate_periodogram(series, config);
    case Method::Whittle: return estimate_whittle(series, config);
    case Method::AbryVeitch: return estimate_abry_veitch(series, config);
  }
  throw DomainError("unknown estimator");
}

}  // namespace hurstlab
