#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

namespace rpnc::sim {

/// Nearest-rank percentile, p in [0, 100]. Empty input gives NaN.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

inline double median(const std::vector<double>& v) { return percentile(v, 50.0); }

/// Empirical P(X <= x).
inline double fraction_le(const std::vector<double>& v, double x) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(std::count_if(v.begin(), v.end(), [x](double s) { return s <= x; })) /
         static_cast<double>(v.size());
}

struct CdfPoint {
  double value;
  double cdf;
};

/// One point per distinct value.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

inline void write_cdf_csv(std::ostream& os, const std::vector<double>& v) {
  os << "abs_delta_d_samples,cdf\n";
  for (const auto& p : empirical_cdf(v)) os << p.value << ',' << p.cdf << '\n';
}

/// y_k = (1 - w) y_{k-1} + w x_k, seeded with x_0.
inline std::vector<double> ewma(const std::vector<double>& x, double w) {
  std::vector<double> y;
  y.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y.push_back(i == 0 ? x[0] : (1.0 - w) * y.back() + w * x[i]);
  return y;
}

/// Least-squares slope of y against its index.
inline double trend_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x, sy += y[i], sxx += x * x, sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct DirectionStats {
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t corrupt = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t gaps = 0;
  std::uint64_t in_flight_end = 0;  // submitted to ARQ but not yet delivered
  double goodput_pkts_per_slot = 0.0;
  double goodput_bytes_per_s = 0.0;
};

struct MetricsReport {
  std::int64_t slots = 0;
  double duration_s = 0.0;
  DirectionStats ab;  // A -> B
  DirectionStats ba;  // B -> A

  // Relay.
  std::uint64_t uplink_slots_single = 0;
  std::uint64_t uplink_slots_both = 0;
  std::uint64_t relay_crc_fail = 0;
  std::uint64_t relay_collisions = 0;
  std::uint64_t relay_missed_users = 0;  // transmitted but not identified
  std::uint64_t relay_false_alarms = 0;
  std::uint64_t downlink_xor = 0;
  std::uint64_t downlink_single = 0;
  std::uint64_t downlink_beacon = 0;
  std::uint64_t max_uplink_per_slot = 0;

  // Timing.
  std::uint64_t cp_violations = 0;
  std::uint64_t nonzero_adjustments = 0;
  std::uint64_t sync_losses = 0;
  std::uint64_t acquisitions = 0;
  std::uint64_t late_transmissions = 0;
  std::vector<double> delta_d_true;      // per both-transmitted uplink slot, samples
  std::vector<double> delta_d_measured;  // CSI estimate; +inf when a user went undetected
  std::uint64_t narrow_multiplies = 0;
  std::uint64_t narrow_searches = 0;

  // ARQ.
  std::uint64_t retransmissions = 0;
  std::uint64_t ack_only_packets = 0;
  std::vector<double> rtt_samples_s;    // application echo RTT
  std::vector<double> decode_gaps_s;    // inter-arrival of decoded data at B
  std::uint64_t latency_floor_violations = 0;
  bool completed = false;  // stream traffic fully delivered
  std::int64_t completion_slot = -1;
};

}  // namespace rpnc::sim
