#pragma once

// Thin RAII layer over FFTW3 for the two transforms the toolkit needs:
// real-to-complex (periodograms) and complex-to-complex (circulant embedding).

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "hurstlab/core.hpp"

namespace hurstlab::fft {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
inline ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

enum class Kind { RealForward, ComplexForward };

// Plans are immutable once created and FFTW's new-array execute functions are
// reentrant, so one cache per process serves every thread. Only the planner
// itself needs the lock.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, std::size_t n) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan plan = nullptr;
    const int len = static_cast<int>(n);
    if (kind == Kind::RealForward) {
      auto in = alloc_real(n);
      auto out = alloc_complex(n / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE);
    } else {
      auto in = alloc_complex(n);
      auto out = alloc_complex(n);
      plan = fftw_plan_dft_1d(len, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<Kind, std::size_t>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized forward DFT of real data: X_k = sum_t x_t exp(-2 pi i k t / n),
/// k = 0 .. n/2.
inline std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto in = detail::alloc_real(n);
  auto out = detail::alloc_complex(n / 2 + 1);
  std::copy(x.begin(), x.end(), in.get());
  fftw_plan plan = detail::PlanCache::instance().get(detail::Kind::RealForward, n);
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(n / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out[k][0], out[k][1]};
  return result;
}

/// Unnormalized forward DFT of complex data.
inline std::vector<std::complex<double>> forward_complex(std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto in = detail::alloc_complex(n);
  auto out = detail::alloc_complex(n);
  for (std::size_t k = 0; k < n; ++k) {
    in[k][0] = x[k].real();
    in[k][1] = x[k].imag();
  }
  fftw_plan plan = detail::PlanCache::instance().get(detail::Kind::ComplexForward, n);
  fftw_execute_dft(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(n);
  for (std::size_t k = 0; k < n; ++k) result[k] = {out[k][0], out[k][1]};
  return result;
}

}  // namespace hurstlab::fft
