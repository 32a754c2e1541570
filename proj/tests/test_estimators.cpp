#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "hurstlab/estimators.hpp"
#include "hurstlab/fgn.hpp"
#include "oracles.hpp"

using namespace hurstlab;

namespace {

TimeSeries fgn(double h, std::size_t n, std::uint64_t seed) { return synthesize_fgn({h, 1.0, n, seed}); }

std::vector<double> mc_estimates(Method m, double h, std::size_t n, std::size_t reps, std::uint64_t base) {
  std::vector<double> out;
  for (std::size_t r = 0; r < reps; ++r) out.push_back(estimate(m, fgn(h, n, derive_seed(base, r)).values()).value);
  return out;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double mse_of(std::span<const double> v, double h0) {
  double s = 0.0;
  for (double x : v) s += (x - h0) * (x - h0);
  return s / double(v.size());
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_method("abry-veitch"), Method::AbryVeitch);
  EXPECT_THROW(parse_method("gph"), DomainError);
}

TEST(EstimatorConfig, Validation) {
  EstimatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.pgram_low_fraction = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.whittle_tolerance = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.wavelet_vanishing_moments = 9;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = detail::fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-14);
}

// ---------- periodogram ----------

TEST(Periodogram, CosineLine) {
  const std::size_t n = 256;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::cos(std::numbers::pi / 2.0 * double(t));
  const auto p = periodogram_of(x);
  ASSERT_EQ(p.size(), 127u);
  std::size_t peak = 0;
  for (std::size_t j = 1; j < p.size(); ++j)
    if (p[j].power > p[peak].power) peak = j;
  EXPECT_NEAR(p[peak].frequency, std::numbers::pi / 2.0, std::numbers::pi / n);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == peak) continue;
    EXPECT_GE(p[peak].power, 100.0 * p[j].power) << j;
  }
}

TEST(Periodogram, WhiteNoiseLevel) {
  const std::size_t n = 16384, reps = 100;
  std::vector<double> acc((n - 1) / 2, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto p = periodogram_of(fgn(0.5, n, derive_seed(3, r)).values());
    for (std::size_t j = 0; j < p.size(); ++j) acc[j] += p[j].power / reps;
  }
  const double level = 1.0 / (2.0 * std::numbers::pi);
  EXPECT_NEAR(mean_of(acc), level, 0.1 * level);
  // flat: each decile of the band averages to the same level
  const std::size_t band = acc.size() / 10;
  for (std::size_t b = 0; b < 10; ++b) {
    const double m = std::accumulate(acc.begin() + b * band, acc.begin() + (b + 1) * band, 0.0) / band;
    EXPECT_NEAR(m, level, 0.1 * level) << "band " << b;
  }
}

TEST(Periodogram, RejectsShortSeries) {
  std::vector<double> x(15, 1.0);
  EXPECT_THROW(periodogram_of(x), DomainError);
  x.push_back(2.0);
  EXPECT_NO_THROW(periodogram_of(x));
}

TEST(Periodogram, MatchesNaiveDft) {
  for (std::size_t n : {64u, 99u, 128u}) {
    const auto x = fgn(0.7, n, n);
    const auto fast = periodogram_of(x.values());
    const auto slow = oracle::naive_periodogram(x.values());
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t j = 0; j < fast.size(); ++j) EXPECT_NEAR(fast[j].power, slow[j], 1e-10 * (1.0 + slow[j]));
  }
}

TEST(Periodogram, Parseval) {
  for (std::size_t n : {1023u, 4096u}) {
    const auto x = fgn(0.8, n, 17);
    const auto p = periodogram_of(x.values());
    // Mean-removed variance equals the sum over all nonzero bins; the
    // one-sided band holds half of it (plus Nyquist for even n).
    const double mu = detail::mean(x.values());
    double var = 0.0;
    for (double v : x.values()) var += (v - mu) * (v - mu);
    var /= double(n);
    double total = 0.0;
    for (const auto& pt : p) total += pt.power;
    total *= 2.0 * 2.0 * std::numbers::pi / double(n);
    if (n % 2 == 0) {
      double nyq = 0.0;
      for (std::size_t t = 0; t < n; ++t) nyq += (t % 2 ? -1.0 : 1.0) * (x[t] - mu);
      total += nyq * nyq / (double(n) * double(n));
    }
    EXPECT_NEAR(total, var, 0.01 * var);
  }
}

TEST(Periodogram, ConstantSeriesGivesZeroPowerAndDegenerateEstimates) {
  const std::vector<double> x(128, 3.5);
  for (const auto& p : periodogram_of(x)) EXPECT_EQ(p.power, 0.0);
  EXPECT_THROW(estimate_periodogram(x), DegenerateSeries);
  EXPECT_THROW(estimate_whittle(x), DegenerateSeries);
}

TEST(PeriodogramEstimator, WhiteNoiseMean) {
  const auto est = mc_estimates(Method::Periodogram, 0.5, 16384, 100, 11);
  EXPECT_NEAR(mean_of(est), 0.5, 0.05);
}

TEST(PeriodogramEstimator, FgnMeanAtLongLength) {
  const auto est = mc_estimates(Method::Periodogram, 0.8, 65536, 200, 12);
  EXPECT_NEAR(mean_of(est), 0.8, 0.05);
}

TEST(PeriodogramEstimator, ShortSeriesStillReturnsValue) {
  const auto e = estimate_periodogram(fgn(0.8, 64, 4).values());
  EXPECT_GT(e.value, 0.0);
  EXPECT_LT(e.value, 1.0);
  EXPECT_EQ(e.diagnostics.at(diag::kPoints), 3.0);
  EXPECT_THROW(estimate_periodogram(fgn(0.8, 63, 4).values()), DomainError);
}

TEST(PeriodogramEstimator, RandomWalkIsClampedAndFlagged) {
  std::vector<double> walk(4096);
  GaussianSource g(8);
  double s = 0.0;
  for (double& v : walk) v = (s += g());
  const auto e = estimate_periodogram(walk);
  EXPECT_EQ(e.value, detail::kClampHigh);
  EXPECT_EQ(e.diagnostics.at(diag::kClamped), 1.0);
}

TEST(PeriodogramEstimator, ReportsDiagnostics) {
  const auto e = estimate_periodogram(fgn(0.8, 4096, 4).values());
  for (const char* k : {diag::kSlope, diag::kIntercept, diag::kPoints, diag::kCorrelation, diag::kClamped})
    EXPECT_TRUE(e.diagnostics.contains(k)) << k;
  EXPECT_NEAR(e.value, 0.5 * (1.0 - e.diagnostics.at(diag::kSlope)), 1e-12);
  ASSERT_TRUE(e.ci_low && e.ci_high);
  EXPECT_LT(*e.ci_low, e.value);
  EXPECT_GT(*e.ci_high, e.value);
}

// ---------- R/S ----------

TEST(RescaledRange, BlockSizes) {
  const auto sizes = detail::rs_block_sizes(1024, 8, 8);
  ASSERT_FALSE(sizes.empty());
  EXPECT_EQ(sizes.front(), 8u);
  EXPECT_LE(sizes.back(), 512u);
  for (std::size_t i = 1; i < sizes.size(); ++i) EXPECT_GT(sizes[i], sizes[i - 1]);
  EXPECT_EQ(sizes[1], 11u);  // round(8 * 10^(1/8)) = round(10.67)
}

TEST(RescaledRange, HandComputedBlock) {
  // x = [1, 3, 2, 6]: mean 3, deviations [-2, 0, -1, 3], path [0, -2, -2, -3, 0]
  // R = 0 - (-3) = 3, population sd = sqrt((4+0+1+9)/4) = sqrt(3.5)
  const std::vector<double> x{1, 3, 2, 6};
  EXPECT_NEAR(detail::mean_rescaled_range(x, 4), 3.0 / std::sqrt(3.5), 1e-14);
}

TEST(RescaledRange, ConstantIsDegenerate) {
  const std::vector<double> x(1024, 1.0);
  EXPECT_THROW(estimate_rs(x), DegenerateSeries);
}

TEST(RescaledRange, WhiteNoiseBand) {
  const auto est = mc_estimates(Method::RS, 0.5, 65536, 100, 21);
  const double m = mean_of(est);
  EXPECT_GE(m, 0.45);
  EXPECT_LE(m, 0.62);
}

TEST(RescaledRange, FgnBandAndSpreadVersusWhittle) {
  std::vector<double> rs, wh;
  for (std::size_t r = 0; r < 100; ++r) {
    const auto x = fgn(0.8, 65536, derive_seed(22, r));
    rs.push_back(estimate_rs(x.values()).value);
    wh.push_back(estimate_whittle(x.values()).value);
  }
  const auto a = oracle::mean_sd(rs), b = oracle::mean_sd(wh);
  EXPECT_GE(a.mean, 0.68);
  EXPECT_LE(a.mean, 0.85);
  EXPECT_GT(a.sd, b.sd);
}

// ---------- spectral density ----------

TEST(SpectralDensity, WhiteNoiseIsFlat) {
  const double ref = fgn_spectral_density(0.5, 1.0);
  for (double lam : {1e-3, 0.1, 0.5, 1.5, 2.5, std::numbers::pi})
    EXPECT_NEAR(fgn_spectral_density(0.5, lam) / ref, 1.0, 1e-6) << lam;
}

TEST(SpectralDensity, LowFrequencyPowerLaw) {
  const double ratio = fgn_spectral_density(0.8, 1e-3) / fgn_spectral_density(0.8, 2e-3);
  EXPECT_NEAR(ratio, std::pow(2.0, 0.6), 0.01 * std::pow(2.0, 0.6));
}

TEST(SpectralDensity, HighFrequencyAgainstBruteForce) {
  const double at_pi = fgn_spectral_density(0.8, std::numbers::pi);
  const double at_half = fgn_spectral_density(0.8, std::numbers::pi / 2.0);
  EXPECT_GT(at_pi, 0.0);
  EXPECT_LT(at_pi, at_half);
  EXPECT_NEAR(at_pi, oracle::brute_force_density(0.8, std::numbers::pi, 1000000), 1e-3 * at_pi);
  EXPECT_NEAR(at_half, oracle::brute_force_density(0.8, std::numbers::pi / 2.0, 1000000), 1e-3 * at_half);
}

TEST(SpectralDensity, TailCorrectionAccuracy) {
  for (double h : {0.5, 0.7, 0.95}) {
    for (double lam : {0.01, 0.7, 2.0, std::numbers::pi}) {
      const double fast = fgn_spectral_density(h, lam);
      const double slow = oracle::brute_force_density(h, lam, 1000000);
      // the brute-force sum misses a tail of order 10^{-6 a}; compare loosely at low a
      EXPECT_NEAR(fast / slow, 1.0, 1e-6) << "H=" << h << " lambda=" << lam;
    }
  }
}

TEST(SpectralDensity, RejectsBadArguments) {
  EXPECT_THROW(fgn_spectral_density(0.8, 0.0), DomainError);
  EXPECT_THROW(fgn_spectral_density(0.8, 4.0), DomainError);
  EXPECT_THROW(fgn_spectral_density(1.0, 1.0), DomainError);
}

TEST(ExpKernel, MatchesLibm) {
  for (double x = -700.0; x <= 700.0; x += 0.137) {
    const double ref = std::exp(x);
    EXPECT_NEAR(detail::exp_moderate(x), ref, 4e-16 * ref) << x;
  }
}

// ---------- Whittle ----------

namespace {
std::vector<PeriodogramPoint> exact_spectrum(double h0, std::size_t n) {
  std::vector<PeriodogramPoint> p;
  for (std::size_t j = 1; j <= (n - 1) / 2; ++j) {
    const double lam = 2.0 * std::numbers::pi * double(j) / double(n);
    p.push_back({lam, fgn_spectral_density(h0, lam)});
  }
  return p;
}
}  // namespace

TEST(Whittle, ObjectiveMatchesDirectEvaluation) {
  const auto pgram = periodogram_of(fgn(0.75, 2048, 5).values());
  const detail::WhittleObjective q(pgram, 200);
  for (double h : {0.02, 0.2, 0.5, 0.75, 0.9, 0.98}) {
    const double direct = oracle::direct_whittle_objective(pgram, h, 200);
    EXPECT_NEAR(q(h), direct, 1e-7 * std::abs(direct) + 1e-9) << h;
  }
}

TEST(Whittle, NoiselessSelfConsistency) {
  for (double h0 : {0.6, 0.7, 0.8}) {
    const auto e = whittle_fit(exact_spectrum(h0, 1024));
    EXPECT_NEAR(e.value, h0, 1e-3) << h0;
    EXPECT_NEAR(e.value, h0, 1e-4) << h0;
  }
}

TEST(Whittle, SingleLongSeries) {
  const auto e = estimate_whittle(fgn(0.8, 65536, 2024).values());
  EXPECT_GE(e.value, 0.78);
  EXPECT_LE(e.value, 0.82);
  ASSERT_TRUE(e.ci_low && e.ci_high);
  EXPECT_LT(*e.ci_low, e.value);
  EXPECT_GT(*e.ci_high, e.value);
  for (const char* k : {diag::kObjective, diag::kScale, diag::kCurvature, diag::kIterations, diag::kClamped})
    EXPECT_TRUE(e.diagnostics.contains(k)) << k;
}

TEST(Whittle, WhiteNoiseMean) {
  const auto est = mc_estimates(Method::Whittle, 0.5, 4096, 100, 31);
  EXPECT_NEAR(mean_of(est), 0.5, 0.02);
}

TEST(Whittle, ShortSeriesAgainstAsymptoticSpread) {
  const std::size_t n = 256;
  const auto est = mc_estimates(Method::Whittle, 0.8, n, 200, 32);
  const auto ms = oracle::mean_sd(est);
  EXPECT_LE(std::abs(ms.mean - 0.8), 0.05);
  EXPECT_LE(ms.sd, 2.0 * std::sqrt(6.0) / (std::numbers::pi * std::sqrt(double(n))));
}

TEST(Whittle, CiCoversTruthAtNominalRate) {
  std::size_t covered = 0;
  const std::size_t reps = 200;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto e = estimate_whittle(fgn(0.7, 2048, derive_seed(33, r)).values());
    if (*e.ci_low <= 0.7 && 0.7 <= *e.ci_high) ++covered;
  }
  EXPECT_GE(covered, 180u);  // 95% nominal, binomial sd ~ 3
}

// ---------- wavelets ----------

TEST(Wavelet, FilterProperties) {
  for (std::size_t p = 1; p <= 8; ++p) {
    const auto h = daubechies_filter(p);
    ASSERT_EQ(h.size(), 2 * p);
    EXPECT_NEAR(std::accumulate(h.begin(), h.end(), 0.0), std::numbers::sqrt2, 1e-14) << p;
    for (std::size_t shift = 0; shift < h.size(); shift += 2) {
      double dot = 0.0;
      for (std::size_t k = 0; k + shift < h.size(); ++k) dot += h[k] * h[k + shift];
      EXPECT_NEAR(dot, shift == 0 ? 1.0 : 0.0, 1e-14) << "p=" << p << " shift=" << shift;
    }
    // p vanishing moments of the wavelet filter g_k = (-1)^k h_{L-1-k}
    for (std::size_t m = 0; m < p; ++m) {
      double moment = 0.0;
      for (std::size_t k = 0; k < h.size(); ++k)
        moment += (k % 2 ? -1.0 : 1.0) * h[h.size() - 1 - k] * std::pow(double(k), double(m));
      EXPECT_NEAR(moment, 0.0, 1e-9 * std::pow(double(h.size()), double(m))) << "p=" << p << " m=" << m;
    }
  }
  EXPECT_THROW(daubechies_filter(0), DomainError);
  EXPECT_THROW(daubechies_filter(9), DomainError);
}

TEST(Wavelet, PerfectReconstruction) {
  const auto x = fgn(0.8, 4096, 41);
  double norm = 0.0;
  for (double v : x.values()) norm = std::max(norm, std::abs(v));
  for (std::size_t p = 1; p <= 8; ++p) {
    for (std::size_t levels : {1u, 4u, 8u}) {
      const auto dec = dwt_forward(x.values(), p, levels);
      ASSERT_EQ(dec.details.size(), levels);
      const auto y = dwt_inverse(dec, p);
      ASSERT_EQ(y.size(), x.size());
      double err = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(y[i] - x[i]));
      EXPECT_LE(err, 1e-9 * norm) << "p=" << p << " levels=" << levels;
    }
  }
  EXPECT_THROW(dwt_forward(x.values(), 3, 13), DomainError);
}

TEST(Wavelet, EnergyIsPreserved) {
  const auto x = fgn(0.6, 1024, 42);
  const auto dec = dwt_forward(x.values(), 3, 5);
  double ex = 0.0, ec = 0.0;
  for (double v : x.values()) ex += v * v;
  for (const auto& d : dec.details)
    for (double v : d) ec += v * v;
  for (double v : dec.approximation) ec += v * v;
  EXPECT_NEAR(ec, ex, 1e-10 * ex);
}

TEST(Wavelet, WhiteNoiseScaleVariancesAreFlat) {
  const auto x = fgn(0.5, 16384, 43);
  const auto s = dwt_detail_variances(x.values());
  ASSERT_GE(s.size(), 3u);
  for (const auto& sv : s) {
    // mean of n_j squared N(0,1) values: sd sqrt(2/n_j)
    EXPECT_NEAR(sv.variance, 1.0, 4.0 * std::sqrt(2.0 / double(sv.count))) << "octave " << sv.scale;
  }
}

TEST(Wavelet, FgnScaleVarianceSlope) {
  double slope_sum = 0.0;
  const std::size_t reps = 100;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto s = dwt_detail_variances(fgn(0.8, 65536, derive_seed(44, r)).values());
    std::vector<double> x, y;
    for (const auto& sv : s)
      if (sv.scale >= 3) {
        x.push_back(double(sv.scale));
        y.push_back(std::log2(sv.variance));
      }
    slope_sum += detail::fit_line(x, y).slope;
  }
  EXPECT_NEAR(slope_sum / reps, 0.6, 0.05);
}

TEST(Wavelet, TooFewScales) {
  const auto x = fgn(0.8, 16, 1);
  EXPECT_THROW(dwt_detail_variances(x.values()), DomainError);
  EXPECT_THROW(estimate_abry_veitch(x.values()), DomainError);
}

TEST(AbryVeitch, WhiteNoiseMean) {
  const auto est = mc_estimates(Method::AbryVeitch, 0.5, 16384, 100, 51);
  EXPECT_NEAR(mean_of(est), 0.5, 0.03);
}

TEST(AbryVeitch, SingleLongSeries) {
  const auto e = estimate_abry_veitch(fgn(0.8, 65536, 2024).values());
  EXPECT_GE(e.value, 0.76);
  EXPECT_LE(e.value, 0.86);
  ASSERT_TRUE(e.ci_low && e.ci_high);
  EXPECT_EQ(e.diagnostics.at(diag::kScaleMin), 3.0);
}

TEST(AbryVeitch, ShortSeriesReturnsValue) {
  const auto e = estimate_abry_veitch(fgn(0.8, 64, 2).values());
  EXPECT_GT(e.value, 0.0);
  EXPECT_LT(e.value, 1.0);
  EXPECT_GE(e.diagnostics.at(diag::kPoints), 3.0);
}

// ---------- cross-cutting properties ----------

TEST(Estimators, ShiftScaleEquivariance) {
  const auto x = fgn(0.7, 4096, 61);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 3.7 * x[i] + 1000.0;
  for (Method m : kAllMethods) {
    EXPECT_NEAR(estimate(m, x.values()).value, estimate(m, y).value, 1e-6) << to_string(m);
  }
}

TEST(Estimators, Deterministic) {
  const auto x = fgn(0.7, 2048, 62);
  for (Method m : kAllMethods) EXPECT_EQ(estimate(m, x.values()).value, estimate(m, x.values()).value);
}

TEST(Estimators, WhittleHasLowestMseOnShortSeries) {
  const std::size_t n = 256, reps = 200;
  std::vector<double> wh, pg, rs;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto x = fgn(0.8, n, derive_seed(63, r));
    wh.push_back(estimate_whittle(x.values()).value);
    pg.push_back(estimate_periodogram(x.values()).value);
    rs.push_back(estimate_rs(x.values()).value);
  }
  EXPECT_LT(mse_of(wh, 0.8), mse_of(pg, 0.8));
  EXPECT_LT(mse_of(wh, 0.8), mse_of(rs, 0.8));
}

TEST(Estimators, ClampedValuesStayInsideInterval) {
  for (std::size_t r = 0; r < 50; ++r) {
    const auto x = fgn(0.95, 64, derive_seed(64, r));
    for (Method m : kAllMethods) {
      const auto e = estimate(m, x.values());
      EXPECT_GE(e.value, detail::kClampLow);
      EXPECT_LE(e.value, detail::kClampHigh);
    }
  }
}
