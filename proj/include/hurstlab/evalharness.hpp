#pragma once

// Monte-Carlo evaluation of the estimators on synthetic fGn: per-cell bias,
// spread and MSE, precision classes, minimum usable length and mean
// convergence along growing prefixes.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "hurstlab/core.hpp"
#include "hurstlab/estimators.hpp"
#include "hurstlab/fgn.hpp"
#include "hurstlab/parallel.hpp"
#include "hurstlab/rng.hpp"
#include "hurstlab/series_io.hpp"

namespace hurstlab {

struct ExperimentGrid {
  std::vector<double> hursts{0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> lengths{64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::size_t replicates = 200;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::uint64_t base_seed = 0;

  void validate() const {
    if (replicates < 2) throw DomainError("replicates must be at least 2");
    if (hursts.empty() || lengths.empty() || methods.empty())
      throw DomainError("grid needs at least one hurst, length and method");
    for (double h : hursts)
      if (!(h > 0.0 && h < 1.0)) throw DomainError("hurst must be in (0,1)");
    for (std::size_t n : lengths)
      if (n < 64) throw DomainError("grid lengths must be at least 64");
  }
};

enum class Precision { HighPrecision, Acceptable, Biased, Poor };

inline std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::HighPrecision: return "high";
    case Precision::Acceptable: return "acceptable";
    case Precision::Biased: return "biased";
    case Precision::Poor: return "poor";
  }
  return "poor";
}

struct ReplicateStats {
  double bias = 0.0;
  double std_dev = 0.0;
  double mse = 0.0;
};

/// bias = H0 - mean, std_dev with n-1 denominator, mse = mean (x_i - H0)^2.
inline ReplicateStats summarize_replicates(std::span<const double> estimates, double nominal) {
  if (estimates.size() < 2) throw DomainError("need at least 2 estimates to summarize");
  const double n = static_cast<double>(estimates.size());
  double sum = 0.0;
  for (double x : estimates) {
    if (!std::isfinite(x)) throw DomainError("estimates must be finite");
    sum += x;
  }
  const double mean = sum / n;
  double ss = 0.0, sq_err = 0.0;
  for (double x : estimates) {
    ss += (x - mean) * (x - mean);
    sq_err += (x - nominal) * (x - nominal);
  }
  return {nominal - mean, std::sqrt(ss / (n - 1.0)), sq_err / n};
}

// Thresholds apply to |bias|; see README for the gap between the classes.
inline Precision classify_precision(double bias, double std_dev) {
  const double b = std::abs(bias);
  if (b <= 0.03 && std_dev <= 0.015) return Precision::HighPrecision;
  if (b > 0.03 && b < 0.05 && std_dev <= 0.02) return Precision::Acceptable;
  if (b > 0.1) return Precision::Biased;
  return Precision::Poor;
}

struct StatsSummary {
  Method method = Method::Whittle;
  double hurst_nominal = 0.0;
  std::size_t length = 0;
  double bias = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();
  double mse = std::numeric_limits<double>::quiet_NaN();
  Precision precision = Precision::Poor;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  bool flagged = false;  // more than 10% of replicates failed
};

struct ReplicateRecord {
  Method method = Method::Whittle;
  double hurst_nominal = 0.0;
  std::size_t length = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::optional<double> estimate;
  std::string error;
};

struct GridResult {
  std::vector<StatsSummary> summaries;   // ordered by (hurst, length, method) as in the grid
  std::vector<ReplicateRecord> records;  // summaries order, then replicate index
  bool any_flagged() const {
    return std::any_of(summaries.begin(), summaries.end(), [](const auto& s) { return s.flagged; });
  }
};

inline constexpr double kFailureThreshold = 0.10;

/// Seed of replicate r in the (H, N) cell. Every method in the cell sees the
/// same series.
inline std::uint64_t replicate_seed(std::uint64_t base_seed, double hurst, std::size_t length,
                                    std::size_t replicate) {
  const std::uint64_t cell = splitmix64(std::bit_cast<std::uint64_t>(hurst)) ^ splitmix64(length * 0x9e37ULL + 1);
  return derive_seed(derive_seed(base_seed, cell), replicate);
}

inline GridResult run_grid(const ExperimentGrid& grid, const EstimatorConfig& config = {}, unsigned threads = 0) {
  grid.validate();
  config.validate();
  const std::size_t n_methods = grid.methods.size();
  const std::size_t n_cells = grid.hursts.size() * grid.lengths.size();
  const std::size_t per_cell = grid.replicates;

  // slot (cell, replicate, method)
  std::vector<ReplicateRecord> slots(n_cells * per_cell * n_methods);
  detail::parallel_for(n_cells * per_cell, threads, [&](std::size_t job) {
    const std::size_t cell = job / per_cell;
    const std::size_t rep = job % per_cell;
    const double hurst = grid.hursts[cell / grid.lengths.size()];
    const std::size_t length = grid.lengths[cell % grid.lengths.size()];
    const std::uint64_t seed = replicate_seed(grid.base_seed, hurst, length, rep);
    std::optional<TimeSeries> series;
    std::string synth_error;
    try {
      series = synthesize_fgn({hurst, 1.0, length, seed});
    } catch (const Error& e) {
      synth_error = e.what();
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      auto& rec = slots[(cell * n_methods + m) * per_cell + rep];
      rec.method = grid.methods[m];
      rec.hurst_nominal = hurst;
      rec.length = length;
      rec.replicate = rep;
      rec.seed = seed;
      if (!series) {
        rec.error = synth_error;
        continue;
      }
      try {
        rec.estimate = estimate(grid.methods[m], *series, config).value;
      } catch (const Error& e) {
        rec.error = e.what();
      }
    }
  });

  GridResult result;
  result.summaries.reserve(n_cells * n_methods);
  std::vector<double> ok;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto first = slots.begin() + static_cast<std::ptrdiff_t>((cell * n_methods + m) * per_cell);
      StatsSummary s;
      s.method = grid.methods[m];
      s.hurst_nominal = first->hurst_nominal;
      s.length = first->length;
      s.replicates = per_cell;
      ok.clear();
      for (auto it = first; it != first + static_cast<std::ptrdiff_t>(per_cell); ++it) {
        if (it->estimate) ok.push_back(*it->estimate);
      }
      s.failures = per_cell - ok.size();
      s.flagged = static_cast<double>(s.failures) > kFailureThreshold * static_cast<double>(per_cell);
      if (ok.size() >= 2) {
        const auto stats = summarize_replicates(ok, s.hurst_nominal);
        s.bias = stats.bias;
        s.std_dev = stats.std_dev;
        s.mse = stats.mse;
        s.precision = classify_precision(s.bias, s.std_dev);
      } else {
        s.flagged = true;
      }
      result.summaries.push_back(s);
    }
  }
  result.records = std::move(slots);
  return result;
}

/// Smallest N whose cell and every longer cell classify as HighPrecision.
inline std::optional<std::size_t> find_nmin(std::span<const StatsSummary> summaries, Method method, double hurst) {
  std::vector<const StatsSummary*> slice;
  for (const auto& s : summaries)
    if (s.method == method && s.hurst_nominal == hurst) slice.push_back(&s);
  if (slice.empty()) throw DomainError("no summaries for " + std::string(to_string(method)) + " at this hurst");
  std::sort(slice.begin(), slice.end(), [](auto* a, auto* b) { return a->length < b->length; });
  for (std::size_t i = 1; i < slice.size(); ++i) {
    if (slice[i]->length != 2 * slice[i - 1]->length)
      throw DomainError("summaries must cover a contiguous power-of-two length range");
  }
  std::optional<std::size_t> nmin;
  for (std::size_t i = slice.size(); i-- > 0;) {
    if (slice[i]->precision != Precision::HighPrecision) break;
    nmin = slice[i]->length;
  }
  return nmin;
}

struct ConvergenceOptions {
  Method method = Method::Whittle;
  double hurst = 0.8;
  std::size_t series_count = 200;
  std::size_t max_length = 65536;  // M
  std::size_t t0 = 64;
  std::size_t step = 200;  // t_u
  std::uint64_t base_seed = 0;
  unsigned threads = 0;
};

struct Checkpoint {
  std::size_t t = 0;
  double mean_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;     // estimates averaged
  std::size_t failures = 0;  // estimator errors skipped
};

struct ConvergenceCurve {
  Method method = Method::Whittle;
  double hurst_nominal = 0.0;
  std::vector<Checkpoint> checkpoints;
};

/// Prefix lengths t0, t0 + step, ... <= max_length.
inline std::vector<std::size_t> checkpoint_lengths(std::size_t t0, std::size_t step, std::size_t max_length) {
  std::vector<std::size_t> ts;
  for (std::size_t t = t0; t <= max_length; t += step) ts.push_back(t);
  return ts;
}

inline ConvergenceCurve mean_convergence_curve(const ConvergenceOptions& opt, const EstimatorConfig& config = {}) {
  config.validate();
  if (opt.t0 < 64) throw DomainError("t0 must be at least 64");
  if (opt.max_length < opt.t0) throw DomainError("max_length must be at least t0");
  if (opt.step == 0) throw DomainError("step must be positive");
  if (opt.series_count == 0) throw DomainError("series_count must be positive");
  const auto ts = checkpoint_lengths(opt.t0, opt.step, opt.max_length);

  std::vector<std::optional<double>> table(opt.series_count * ts.size());
  detail::parallel_for(opt.series_count, opt.threads, [&](std::size_t s) {
    const auto series = synthesize_fgn({opt.hurst, 1.0, opt.max_length, derive_seed(opt.base_seed, s)});
    const auto values = series.values();
    for (std::size_t c = 0; c < ts.size(); ++c) {
      try {
        table[s * ts.size() + c] = estimate(opt.method, values.first(ts[c]), config).value;
      } catch (const Error&) {
      }
    }
  });

  ConvergenceCurve curve;
  curve.method = opt.method;
  curve.hurst_nominal = opt.hurst;
  curve.checkpoints.resize(ts.size());
  for (std::size_t c = 0; c < ts.size(); ++c) {
    auto& cp = curve.checkpoints[c];
    cp.t = ts[c];
    double sum = 0.0;
    for (std::size_t s = 0; s < opt.series_count; ++s) {
      if (const auto& v = table[s * ts.size() + c]) {
        sum += *v;
        ++cp.count;
      } else {
        ++cp.failures;
      }
    }
    if (cp.count > 0) cp.mean_estimate = sum / static_cast<double>(cp.count);
  }
  return curve;
}

// CSV exports.

inline void write_summary_csv(std::ostream& out, std::span<const StatsSummary> summaries) {
  out << "method,H0,N,bias,std,mse,class\n";
  for (const auto& s : summaries) {
    out << to_string(s.method) << ',' << detail::format_double(s.hurst_nominal) << ',' << s.length << ','
        << detail::format_double(s.bias) << ',' << detail::format_double(s.std_dev) << ','
        << detail::format_double(s.mse) << ',' << to_string(s.precision) << '\n';
  }
}

inline void write_replicates_csv(std::ostream& out, std::span<const ReplicateRecord> records) {
  out << "method,H0,N,replicate,seed,estimate,status\n";
  for (const auto& r : records) {
    out << to_string(r.method) << ',' << detail::format_double(r.hurst_nominal) << ',' << r.length << ','
        << r.replicate << ',' << r.seed << ',';
    if (r.estimate) {
      out << detail::format_double(*r.estimate) << ",ok\n";
    } else {
      std::string reason = r.error;
      std::replace(reason.begin(), reason.end(), ',', ';');
      out << ",failed: " << reason << '\n';
    }
  }
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceCurve& curve) {
  out << "t,mean_estimate\n";
  for (const auto& cp : curve.checkpoints) out << cp.t << ',' << detail::format_double(cp.mean_estimate) << '\n';
}

}  // namespace hurstlab
