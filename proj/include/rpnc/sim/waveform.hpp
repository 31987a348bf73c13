#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "rpnc/baseband/fractional_delay.hpp"
#include "rpnc/baseband/sample_stream.hpp"

namespace rpnc::sim {

using baseband::SampleStream;

inline std::vector<Complex> make_taps(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Complex> t;
  for (auto [re, im] : pairs) t.emplace_back(re, im);
  return t;
}

/// Linear convolution of `x` with channel taps.
inline std::vector<Complex> convolve(std::span<const Complex> x, std::span<const Complex> taps) {
  if (taps.size() == 1) {
    std::vector<Complex> y(x.begin(), x.end());
    if (taps[0] != Complex(1.0)) for (auto& v : y) v *= taps[0];
    return y;
  }
  std::vector<Complex> y(x.size() + taps.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < taps.size(); ++k) y[i + k] += x[i] * taps[k];
  return y;
}

/// One transmitted frame as seen by a receiver: samples, fractional start tick
/// in the receiver's sample clock, and the path taps.
struct Arrival {
  const std::vector<Complex>* frame = nullptr;
  double start = 0.0;
  std::vector<Complex> taps{Complex(1.0)};
};

/// Zero-mean complex Gaussian noise with power 10^(-snr/10) relative to a
/// unit-power signal.
template <class Rng>
void add_awgn(SampleStream& s, double snr_db, Rng& rng) {
  const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& v : s.samples) v += Complex(n(rng), n(rng));
}

/// Renders only the receiver window [origin, origin + len): each arrival is
/// convolved with its taps and placed at its fractional start, then AWGN is added.
template <class Rng>
SampleStream render_window(std::int64_t origin, std::size_t len, std::span<const Arrival> arrivals, double snr_db,
                           bool noise, Rng& rng) {
  SampleStream s{std::vector<Complex>(len, 0.0), origin};
  for (const auto& a : arrivals) {
    const auto x = convolve(*a.frame, a.taps);
    baseband::add_delayed(s, x, a.start);
  }
  if (noise) add_awgn(s, snr_db, rng);
  return s;
}

/// Relay-side superposition of two uplink frames.
template <class Rng>
SampleStream superpose_uplink(const Arrival& a, const Arrival& b, std::int64_t origin, std::size_t len, double snr_db,
                              bool noise, Rng& rng) {
  const Arrival both[] = {a, b};
  return render_window(origin, len, std::span<const Arrival>(both), snr_db, noise, rng);
}

/// Arrival offset of two uplink frames in samples, and whether it fits the CP.
inline bool within_cp(double offset_samples, std::size_t cp_len) {
  return std::abs(offset_samples) <= static_cast<double>(cp_len);
}

}  // namespace rpnc::sim
