#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "rpnc/baseband/correlator.hpp"
#include "rpnc/baseband/preamble.hpp"

namespace rpnc::baseband {

struct Detection {
  Role role = Role::Relay;
  std::int64_t start_tick = 0;  // first sample of the preamble

  auto operator<=>(const Detection&) const = default;
};

struct SyncThresholds {
  double cross = 0.5;     // normalized cross-correlation peak
  double autocorr = 0.8;  // normalized autocorrelation plateau
  bool normalize = true;  // false: compare |c| / E_x against `cross`
};

struct SyncResult {
  std::vector<Detection> detections;
  CorrelatorCost cost;
  CorrelatorCost cross_cost;   // cross-correlation share of `cost`
  std::uint64_t cross_invocations = 0;
};

namespace detail {

inline bool passes(const CrossCorrPeak& pk, double ex, const SyncThresholds& th) {
  if (th.normalize) return pk.normalized >= th.cross;
  return ex > 0 && pk.peak_magnitude / ex >= th.cross;
}

inline void sort_detections(std::vector<Detection>& d) { std::sort(d.begin(), d.end()); }

}  // namespace detail

/// Cross-correlates every position of `y` against each role's STS.
inline SyncResult sync_exhaustive_cross(const SampleStream& y,
                                        const std::vector<FramePreamble>& preambles,
                                        const SyncThresholds& th = {}) {
  SyncResult out;
  for (const auto& pre : preambles) {
    const auto len = static_cast<std::int64_t>(pre.sts.size());
    const std::int64_t positions = y.size() - len + 1;
    if (positions <= 0) continue;
    const double ex = energy(pre.sts);
    std::vector<double> mag(static_cast<std::size_t>(positions));
    std::vector<double> norm(static_cast<std::size_t>(positions));
    const Complex* base = y.samples.data();
    double ey = energy({base, static_cast<std::size_t>(len)});
    for (std::int64_t k = 0; k < positions; ++k) {
      if (k > 0) ey += std::norm(base[k + len - 1]) - std::norm(base[k - 1]);
      Complex c = 0.0;
      for (std::int64_t i = 0; i < len; ++i) c += base[k + i] * std::conj(pre.sts[static_cast<std::size_t>(i)]);
      mag[static_cast<std::size_t>(k)] = std::abs(c);
      norm[static_cast<std::size_t>(k)] = ey > 1e-300 ? std::abs(c) / std::sqrt(ey * ex) : 0.0;
    }
    out.cost.complex_multiplies += static_cast<std::uint64_t>(positions * len);
    out.cost.complex_adds += static_cast<std::uint64_t>(positions * (len - 1));

    auto hit = [&](std::int64_t k) {
      return th.normalize ? norm[static_cast<std::size_t>(k)] >= th.cross
                          : mag[static_cast<std::size_t>(k)] / ex >= th.cross;
    };
    const auto half = static_cast<std::int64_t>(pre.params.cp_len / 2);
    std::int64_t k = 0;
    while (k < positions) {
      if (!hit(k)) { ++k; continue; }
      std::int64_t best = k;
      for (std::int64_t j = k + 1; j <= std::min(k + half, positions - 1); ++j)
        if (mag[static_cast<std::size_t>(j)] > mag[static_cast<std::size_t>(best)]) best = j;
      const std::int64_t peak = y.origin_tick + best;
      out.detections.push_back({pre.role, peak - static_cast<std::int64_t>(pre.sts_match_offset())});
      k = best + static_cast<std::int64_t>(pre.params.symbol_len());
    }
  }
  detail::sort_detections(out.detections);
  return out;
}

/// Autocorrelation-triggered detector. A plateau alerts a narrow C+1 position
/// cross-correlation; the plateau phase picks the role (B's STS copies alternate
/// sign).
inline SyncResult sync_standard(const SampleStream& y, const std::vector<FramePreamble>& preambles,
                                const SyncThresholds& th = {}) {
  SyncResult out;
  if (preambles.empty()) return out;
  const OfdmParams& p = preambles.front().params;
  if (th.autocorr <= 0.0 || th.autocorr > 1.0)
    throw ParameterError("sync_standard: autocorrelation threshold must be in (0,1]");
  const auto len = static_cast<std::int64_t>(p.sts_len);
  if (y.size() < 2 * len) return out;

  const auto ac = auto_correlate_stream(y, p.sts_len);
  out.cost += ac.cost;
  const auto half = static_cast<std::int64_t>(p.cp_len / 2);
  const auto lead = static_cast<std::int64_t>(std::ceil((1.0 - th.autocorr) * static_cast<double>(len)));
  bool armed = true;
  std::int64_t resume = y.origin_tick;
  for (std::size_t j = 0; j < ac.values.size(); ++j) {
    const std::int64_t n = ac.first_tick + static_cast<std::int64_t>(j);
    const double m = ac.metric(j);
    if (!armed) {
      if (m < th.autocorr) armed = true;
      continue;
    }
    if (n < resume || m < th.autocorr) continue;
    armed = false;
    const int sign = ac.values[j].real() >= 0.0 ? 1 : -1;
    const FramePreamble* pre = nullptr;
    for (const auto& cand : preambles)
      if (sts_sign(cand.role) == sign) { pre = &cand; break; }
    if (pre == nullptr) continue;

    const std::int64_t rough = n - 2 * len + 1 + lead;
    std::int64_t lo = std::max(rough - half, y.origin_tick);
    std::int64_t hi = std::min(rough + half, y.end_tick() - len);
    if (hi < lo) continue;
    const auto pk = cross_correlate(y, pre->sts, lo, hi - lo + 1);
    out.cost += pk.cost;
    out.cross_cost += pk.cost;
    ++out.cross_invocations;
    if (!detail::passes(pk, energy(pre->sts), th)) continue;
    const std::int64_t start = pk.peak_tick - static_cast<std::int64_t>(pre->sts_match_offset());
    out.detections.push_back({pre->role, start});
    resume = start + static_cast<std::int64_t>(pre->sts_field_offset() + p.symbol_len()) + len;
  }
  detail::sort_detections(out.detections);
  return out;
}

struct NarrowResult {
  std::optional<Detection> detection;
  CrossCorrPeak peak;
  CorrelatorCost cost;
};

/// Searches the +-C/2 vicinity of the expected preamble start.
inline NarrowResult sync_narrow(const SampleStream& y, const FramePreamble& pre,
                                std::int64_t expected_start, const SyncThresholds& th = {}) {
  const auto half = static_cast<std::int64_t>(pre.params.cp_len / 2);
  const std::int64_t centre = expected_start + static_cast<std::int64_t>(pre.sts_match_offset());
  NarrowResult out;
  out.peak = cross_correlate(y, pre.sts, centre - half, 2 * half + 1);
  out.cost = out.peak.cost;
  if (out.peak.peak_magnitude > 0.0 && detail::passes(out.peak, energy(pre.sts), th)) {
    out.detection = Detection{pre.role,
                              out.peak.peak_tick - static_cast<std::int64_t>(pre.sts_match_offset())};
  }
  return out;
}

/// Ticks a narrow search needs around `expected_start`.
inline std::pair<std::int64_t, std::int64_t> narrow_span(const FramePreamble& pre,
                                                         std::int64_t expected_start) {
  const auto half = static_cast<std::int64_t>(pre.params.cp_len / 2);
  const std::int64_t centre = expected_start + static_cast<std::int64_t>(pre.sts_match_offset());
  return {centre - half, centre + half + static_cast<std::int64_t>(pre.sts.size())};
}

}  // namespace rpnc::baseband
