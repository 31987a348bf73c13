#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "rpnc/baseband/fft.hpp"
#include "rpnc/baseband/preamble.hpp"

namespace rpnc::baseband {

struct Csi {
  std::vector<Complex> gains;  // indexed by FFT bin
  std::vector<bool> valid;     // bins where the source LTS carries energy
  Role source_role = Role::EndNodeA;
};

/// Least-squares per-subcarrier estimate averaged over whole LTS bodies;
/// `first` names the LTS repetition the region starts with.
inline Csi estimate_csi(std::span<const Complex> region, const FramePreamble& pre, std::size_t first = 0) {
  const std::size_t n = pre.params.n_subcarriers;
  if (region.empty() || region.size() % n != 0)
    throw RangeError("estimate_csi: region must hold whole LTS bodies");
  const std::size_t reps = region.size() / n;
  Csi csi;
  csi.source_role = pre.role;
  csi.gains.assign(n, 0.0);
  csi.valid.assign(n, false);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto spec = fft(region.subspan(r * n, n));
    const auto& ref = pre.lts_freq[(first + r) % pre.lts_freq.size()];
    for (std::size_t b = 0; b < n; ++b) {
      if (std::abs(ref[b]) == 0.0) continue;
      csi.gains[b] += spec[b] / ref[b] / static_cast<double>(reps);
      csi.valid[b] = true;
    }
  }
  return csi;
}

inline Csi estimate_csi(std::span<const Complex> region, Role role, const OfdmParams& p,
                        std::uint64_t seed = kDefaultPreambleSeed) {
  return estimate_csi(region, make_preamble(role, p, seed));
}

/// Multiplies subcarrier k by exp(-j 2 pi delta k / N).
inline Csi shift_csi(Csi csi, double delta) {
  const std::size_t n = csi.gains.size();
  for (std::size_t b = 0; b < n; ++b) {
    const double k = static_cast<double>(subcarrier_of(b, n));
    csi.gains[b] *= std::polar(1.0, -2.0 * std::numbers::pi * delta * k / static_cast<double>(n));
  }
  return csi;
}

/// Delay in samples from the slope of unwrapped phase versus subcarrier index.
inline double phase_slope_offset(const Csi& csi) {
  const std::size_t n = csi.gains.size();
  std::vector<std::pair<double, double>> pts;  // (k, phase)
  for (std::int64_t k = -static_cast<std::int64_t>(n / 2); k < static_cast<std::int64_t>(n / 2); ++k) {
    const auto b = bin_of(k, n);
    if (b >= csi.valid.size() || !csi.valid[b] || std::abs(csi.gains[b]) < 1e-12) continue;
    pts.emplace_back(static_cast<double>(k), std::arg(csi.gains[b]));
  }
  if (pts.size() < 2) throw EstimationError("phase_slope_offset: fewer than two usable subcarriers");
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double d = pts[i].second - pts[i - 1].second;
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    pts[i].second = pts[i - 1].second + d;
  }
  double mk = 0, mp = 0;
  for (auto [k, ph] : pts) { mk += k; mp += ph; }
  mk /= static_cast<double>(pts.size());
  mp /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [k, ph] : pts) { sxy += (k - mk) * (ph - mp); sxx += (k - mk) * (k - mk); }
  if (sxx == 0.0) throw EstimationError("phase_slope_offset: degenerate subcarrier set");
  const double slope = sxy / sxx;
  return -slope * static_cast<double>(n) / (2.0 * std::numbers::pi);
}

inline double arrival_diff(const Csi& a, const Csi& b) {
  return phase_slope_offset(a) - phase_slope_offset(b);
}

}  // namespace rpnc::baseband
