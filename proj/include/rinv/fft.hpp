#pragma once

// Periodic pseudo-spectral transforms on power-of-two grids, backed by FFTW.
// Plans are created once per grid size under a lock and executed through the
// new-array interface, so transforms may run concurrently.

#include <rinv/scale.hpp>

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace rinv {

class FftPlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  ~FftPlanCache() {
    for (auto& [size, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  Plans get(std::size_t size) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(size);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(size);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int n = static_cast<int>(size);
    Plans plans;
    plans.forward = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.backward = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(size, plans);
    return plans;
  }

 private:
  FftPlanCache() = default;

  std::mutex mutex_;
  std::map<std::size_t, Plans> plans_;
};

/// Signed [lowest, highest] active mode of a nonzero vector.
inline std::pair<long, long> active_range(const ScaleVector& u) {
  long lo = u.k_max() + 1;
  long hi = -u.k_max() - 1;
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (u[k] == Complex{}) continue;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  return {lo, hi};
}

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Grid values u(x_j), x_j = 2 pi j / grid_size, of u(x) = sum_k u_k e^{ikx}.
inline std::vector<Complex> to_grid(const ScaleVector& u, std::size_t grid_size) {
  std::vector<Complex> values(grid_size, Complex{});
  const long m = static_cast<long>(grid_size);
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (u[k] == Complex{}) continue;
    values[static_cast<std::size_t>(((k % m) + m) % m)] += u[k];
  }
  const auto plans = FftPlanCache::instance().get(grid_size);
  auto* buf = reinterpret_cast<fftw_complex*>(values.data());
  fftw_execute_dft(plans.backward, buf, buf);
  return values;
}

/// Inverse of to_grid, keeping the modes |k| <= min(spec.k_max, grid_size / 2 - 1).
inline ScaleVector from_grid(std::vector<Complex> values, const ScaleSpec& spec) {
  const std::size_t grid_size = values.size();
  const auto plans = FftPlanCache::instance().get(grid_size);
  auto* buf = reinterpret_cast<fftw_complex*>(values.data());
  fftw_execute_dft(plans.forward, buf, buf);
  ScaleVector out(spec);
  const long m = static_cast<long>(grid_size);
  const long top = std::min(spec.k_max, m / 2 - 1);
  const double inv = 1.0 / static_cast<double>(grid_size);
  for (long k = -top; k <= top; ++k) {
    out[k] = values[static_cast<std::size_t>(((k % m) + m) % m)] * inv;
  }
  return out;
}

/// Pointwise product of three spectral functions, exact (alias free) on the
/// modes |k| <= spec.k_max.  With K the highest active input mode the product
/// reaches mode 3K, so the grid holds at least max(6K + 2, oversample (2K + 1))
/// points.
inline ScaleVector triple_product(const ScaleVector& a, const ScaleVector& b,
                                  const ScaleVector& c, double oversample = 2.0) {
  const long top = std::max({a.highest_active_mode(), b.highest_active_mode(),
                             c.highest_active_mode()});
  if (top < 0) return ScaleVector(a.spec());
  const auto wanted = static_cast<std::size_t>(oversample * static_cast<double>(2 * top + 1));
  const std::size_t grid_size = next_power_of_two(std::max<std::size_t>(wanted, 6 * top + 2));
  auto va = to_grid(a, grid_size);
  const auto vb = to_grid(b, grid_size);
  const auto vc = (&c == &b) ? vb : to_grid(c, grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) va[j] *= vb[j] * vc[j];
  ScaleVector out = from_grid(std::move(va), a.spec());
  // The product is supported in the sum of the input supports; clearing the
  // rest drops FFT round-off that would otherwise seed every mode.
  const auto [lo_a, hi_a] = active_range(a);
  const auto [lo_b, hi_b] = active_range(b);
  const auto [lo_c, hi_c] = active_range(c);
  const long lo = lo_a + lo_b + lo_c;
  const long hi = hi_a + hi_b + hi_c;
  for (long k = -out.k_max(); k <= out.k_max(); ++k) {
    if (k < lo || k > hi) out[k] = Complex{};
  }
  return out;
}

}  // namespace rinv
