#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include "rpnc/baseband/sample_stream.hpp"

namespace rpnc::baseband {

inline constexpr int kInterpHalfWidth = 16;

/// Blackman-windowed sinc evaluated at x (samples).
inline double windowed_sinc(double x) {
  const double w = static_cast<double>(kInterpHalfWidth) + 1.0;
  if (std::abs(x) >= w) return 0.0;
  const double s = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  const double u = (x + w) / (2.0 * w);
  const double win = 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * u) + 0.08 * std::cos(4.0 * std::numbers::pi * u);
  return s * win;
}

/// Adds gain * src, delayed so src[0] lands at fractional tick `start`, into dst.
inline void add_delayed(SampleStream& dst, std::span<const Complex> src, double start, Complex gain = 1.0) {
  const double fl = std::floor(start);
  const auto base = static_cast<std::int64_t>(fl);
  const double frac = start - fl;
  const auto n = static_cast<std::int64_t>(src.size());
  if (frac < 1e-12) {
    const std::int64_t lo = std::max(dst.origin_tick, base);
    const std::int64_t hi = std::min(dst.end_tick(), base + n);
    for (std::int64_t t = lo; t < hi; ++t) dst.at(t) += gain * src[static_cast<std::size_t>(t - base)];
    return;
  }
  constexpr int kTaps = 2 * kInterpHalfWidth + 2;
  std::array<double, kTaps> taps{};
  for (int i = 0; i < kTaps; ++i) taps[i] = windowed_sinc(static_cast<double>(i - kInterpHalfWidth) - frac);
  const std::int64_t lo = std::max(dst.origin_tick, base - kInterpHalfWidth - 1);
  const std::int64_t hi = std::min(dst.end_tick(), base + n + kInterpHalfWidth + 2);
  for (std::int64_t t = lo; t < hi; ++t) {
    Complex acc = 0.0;
    for (int i = 0; i < kTaps; ++i) {
      const std::int64_t k = t - base - (i - kInterpHalfWidth);
      if (k < 0 || k >= n) continue;
      acc += taps[i] * src[static_cast<std::size_t>(k)];
    }
    dst.at(t) += gain * acc;
  }
}

}  // namespace rpnc::baseband
