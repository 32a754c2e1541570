#pragma once

// Fractional Gaussian noise: the exact second-order self-similar model,
// block aggregation, and exact synthesis by circulant embedding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/fft.hpp"
#include "hurstlab/rng.hpp"

namespace hurstlab {

/// Parameters of one synthetic fGn realization.
struct FgnSpec {
  double hurst = 0.5;
  double variance = 1.0;
  std::size_t length = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must be in (0,1)");
    if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("variance must be positive");
    if (length < 2) throw DomainError("length must be at least 2");
  }
};

/// Covariance ring of the circulant embedding and its spectrum.
struct AutocovarianceRing {
  std::vector<double> lags;                   // rho(0) .. rho(N-1)
  std::vector<double> embedding_eigenvalues;  // 2N values, clamped at zero
  double min_raw_eigenvalue = 0.0;            // before clamping
};

/// Relative tolerance on negative embedding eigenvalues, as a fraction of the variance.
inline constexpr double kEigenvalueTolerance = 1e-8;

/// Autocovariance of fGn at integer lag k:
/// sigma^2/2 * ((k+1)^{2H} - 2 k^{2H} + (k-1)^{2H}), and sigma^2 at k = 0.
inline double target_autocovariance(double hurst, double variance, std::size_t lag) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must be in (0,1)");
  if (!(variance > 0.0)) throw DomainError("variance must be positive");
  if (lag == 0) return variance;
  const double k = static_cast<double>(lag);
  const double e = 2.0 * hurst;
  return 0.5 * variance * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(k - 1.0, e));
}

namespace detail {

// Clamps roundoff-level negative eigenvalues to zero and returns the raw
// minimum. Anything below -kEigenvalueTolerance * variance is an error.
inline double clamp_embedding_spectrum(std::vector<double>& eigenvalues, double variance) {
  const double tol = kEigenvalueTolerance * variance;
  double min_raw = eigenvalues.empty() ? 0.0 : eigenvalues.front();
  for (double& ev : eigenvalues) {
    min_raw = std::min(min_raw, ev);
    if (ev < -tol)
      throw EmbeddingNotPsd("circulant embedding eigenvalue " + std::to_string(ev) + " is below -" +
                            std::to_string(tol));
    if (ev < 0.0) ev = 0.0;
  }
  return min_raw;
}

}  // namespace detail

inline AutocovarianceRing build_embedding(const FgnSpec& spec) {
  spec.validate();
  const std::size_t n = spec.length;
  const std::size_t m = 2 * n;

  AutocovarianceRing ring;
  ring.lags.resize(n);
  for (std::size_t k = 0; k < n; ++k) ring.lags[k] = target_autocovariance(spec.hurst, spec.variance, k);

  // rho(0), ..., rho(N-1), rho(N), rho(N-1), ..., rho(1)
  std::vector<double> circ(m);
  for (std::size_t k = 0; k < n; ++k) circ[k] = ring.lags[k];
  circ[n] = target_autocovariance(spec.hurst, spec.variance, n);
  for (std::size_t k = 1; k < n; ++k) circ[m - k] = ring.lags[k];

  // The ring is real and symmetric, so its DFT is real.
  const auto half = fft::forward_real(circ);
  ring.embedding_eigenvalues.resize(m);
  for (std::size_t k = 0; k <= n; ++k) ring.embedding_eigenvalues[k] = half[k].real();
  for (std::size_t k = n + 1; k < m; ++k) ring.embedding_eigenvalues[k] = half[m - k].real();

  ring.min_raw_eigenvalue = detail::clamp_embedding_spectrum(ring.embedding_eigenvalues, spec.variance);
  return ring;
}

/// Exact fGn sample path of length spec.length (Davies-Harte). Deterministic in
/// (spec, seed). Uses the real part of the transformed, spectrally weighted
/// complex Gaussian vector; its covariance is exactly the target ring.
inline TimeSeries synthesize_fgn(const FgnSpec& spec) {
  const AutocovarianceRing ring = build_embedding(spec);
  const std::size_t m = ring.embedding_eigenvalues.size();
  GaussianSource gauss(spec.seed);
  std::vector<std::complex<double>> weighted(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double scale = std::sqrt(ring.embedding_eigenvalues[k] * inv_m);
    const double re = gauss();
    const double im = gauss();
    weighted[k] = {scale * re, scale * im};
  }
  const auto mixed = fft::forward_complex(weighted);
  std::vector<double> values(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) values[t] = mixed[t].real();
  return TimeSeries(std::move(values));
}

/// Block means over consecutive non-overlapping blocks of size m. A trailing
/// partial block is dropped.
inline TimeSeries aggregate_blocks(std::span<const double> series, std::size_t m) {
  if (m == 0) throw DomainError("aggregation factor must be positive");
  if (m > series.size()) throw DomainError("aggregation factor exceeds series length");
  const std::size_t blocks = series.size() / m;
  std::vector<double> out(blocks);
  for (std::size_t i = 0; i < blocks; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += series[i * m + j];
    out[i] = s / static_cast<double>(m);
  }
  return TimeSeries(std::move(out));
}

}  // namespace hurstlab
