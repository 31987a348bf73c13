#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "rpnc/sim/config.hpp"

namespace rpnc::sim {

/// Logistic PER curve: 1 / (1 + exp(slope (snr - snr50))).
inline double logistic_per(double snr_db, double snr50_db, double slope_per_db) {
  return 1.0 / (1.0 + std::exp(slope_per_db * (snr_db - snr50_db)));
}

/// Piecewise-linear interpolation in SNR, clamped at both ends.
inline double table_per(const PerTable& t, double snr_db) {
  if (snr_db <= t.front().first) return t.front().second;
  if (snr_db >= t.back().first) return t.back().second;
  auto hi = std::upper_bound(t.begin(), t.end(), snr_db, [](double s, const auto& p) { return s < p.first; });
  auto lo = hi - 1;
  const double f = (snr_db - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

enum class PerMode : std::uint8_t { Single, Xor };

/// SNR to PER for single-user and XOR decoding.
class PerModel {
 public:
  explicit PerModel(const ChannelSettings& ch) : ch_(ch) {}

  double per(PerMode mode, double snr_db) const {
    if (ch_.fixed_per) return *ch_.fixed_per;
    if (mode == PerMode::Single) {
      if (ch_.per_table_single) return table_per(*ch_.per_table_single, snr_db);
      return logistic_per(snr_db, ch_.snr50_db, ch_.slope_per_db);
    }
    if (ch_.per_table_xor) return table_per(*ch_.per_table_xor, snr_db);
    return logistic_per(snr_db, ch_.snr50_db + ch_.xor_shift_db, ch_.slope_per_db);
  }
  double per(PerMode mode) const { return per(mode, ch_.snr_db); }

 private:
  ChannelSettings ch_;
};

enum class UplinkOutcome : std::uint8_t { None, A, B, Xor };

constexpr const char* to_string(UplinkOutcome o) {
  switch (o) {
    case UplinkOutcome::None: return "none";
    case UplinkOutcome::A: return "A";
    case UplinkOutcome::B: return "B";
    case UplinkOutcome::Xor: return "xor";
  }
  return "?";
}

struct UplinkResult {
  UplinkOutcome outcome = UplinkOutcome::None;
  bool erased = false;
};

/// Relay reception at packet level. Both senders give an XOR outcome erased with
/// the XOR-mode PER; one sender gives a single-user outcome.
template <class Rng>
UplinkResult packet_level_uplink(bool tx_a, bool tx_b, const PerModel& model, Rng& rng) {
  UplinkResult r;
  if (!tx_a && !tx_b) return r;
  r.outcome = tx_a && tx_b ? UplinkOutcome::Xor : tx_a ? UplinkOutcome::A : UplinkOutcome::B;
  const double p = model.per(r.outcome == UplinkOutcome::Xor ? PerMode::Xor : PerMode::Single);
  r.erased = std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng);
  return r;
}

template <class Rng>
bool downlink_erased(const PerModel& model, Rng& rng) {
  return std::bernoulli_distribution(std::clamp(model.per(PerMode::Single), 0.0, 1.0))(rng);
}

}  // namespace rpnc::sim
