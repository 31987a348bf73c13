#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "rpnc/common.hpp"

namespace rpnc::baseband {

namespace detail {

// FFTW planning is not thread-safe; execution with new arrays is.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(n), b(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~FftPlans() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline std::vector<Complex> run_fft(std::span<const Complex> in, int sign) {
  std::vector<Complex> in_copy(in.begin(), in.end());
  std::vector<Complex> out(in.size());
  fftw_plan p = FftPlans::instance().get(in.size(), sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in_copy.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace detail

/// Forward DFT, X[k] = sum x[n] e^{-j2pi kn/N}.
inline std::vector<Complex> fft(std::span<const Complex> x) {
  return detail::run_fft(x, FFTW_FORWARD);
}

/// Inverse DFT including the 1/N factor.
inline std::vector<Complex> ifft(std::span<const Complex> x) {
  auto out = detail::run_fft(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace rpnc::baseband
