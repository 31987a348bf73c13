#pragma once

#include <cmath>
#include <cstdint>

#include "rpnc/timing/hw_time.hpp"

namespace rpnc::sim {

/// Global simulated time in picoseconds.
using GlobalTime = std::int64_t;
inline constexpr GlobalTime kPsPerSecond = 1'000'000'000'000;

inline GlobalTime to_global(double seconds) { return static_cast<GlobalTime>(std::llround(seconds * 1e12)); }
inline double to_seconds(GlobalTime g) { return static_cast<double>(g) / 1e12; }

namespace detail {
inline __int128 floor_div128(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline __int128 ceil_div128(__int128 a, __int128 b) { return -floor_div128(-a, b); }
}  // namespace detail

/// A node's sample clock. Tick k occurs at global time g0 + ceil(k / (B (1 + ppm 1e-6)))
/// picoseconds; drift is held in parts per billion so every conversion is integer.
class HardwareClock {
 public:
  HardwareClock(GlobalTime g0, std::int64_t bandwidth, double drift_ppm, timing::HwTime hw_t0)
      : g0_(g0), bandwidth_(bandwidth), ppb_(std::llround(drift_ppm * 1000.0)), hw_t0_(hw_t0) {
    timing::sample_period(bandwidth);
    if (ppb_ <= -1'000'000'000) throw ParameterError("HardwareClock: drift must exceed -1e6 ppm");
  }

  GlobalTime g0() const { return g0_; }
  std::int64_t bandwidth() const { return bandwidth_; }
  double drift_ppm() const { return static_cast<double>(ppb_) / 1000.0; }
  timing::HwTime hw_t0() const { return hw_t0_; }

  /// Global time of tick k.
  GlobalTime global_at(std::int64_t tick) const {
    return g0_ + static_cast<GlobalTime>(detail::ceil_div128(static_cast<__int128>(tick) * kNum, den()));
  }

  /// Last tick at or before global time g.
  std::int64_t tick_at(GlobalTime g) const {
    return static_cast<std::int64_t>(detail::floor_div128(static_cast<__int128>(g - g0_) * den(), kNum));
  }

  /// Fractional tick position of global time g.
  double tick_position(GlobalTime g) const {
    const auto whole = tick_at(g);
    const auto rem = static_cast<__int128>(g - g0_) * den() - static_cast<__int128>(whole) * kNum;
    return static_cast<double>(whole) + static_cast<double>(rem) / static_cast<double>(kNum);
  }

  /// Hardware timestamp T0 + k/B of tick k.
  timing::HwTime hw_at(std::int64_t tick) const { return timing::sample_count_arrival(tick, hw_t0_, bandwidth_); }

  /// Global time of a hardware timestamp that falls on a sample.
  GlobalTime global_of_hw(timing::HwTime t) const {
    return global_at(timing::SampleCounter(hw_t0_, bandwidth_).tick_of(t));
  }

 private:
  static constexpr __int128 kNum = static_cast<__int128>(kPsPerSecond) * 1'000'000'000;
  __int128 den() const { return static_cast<__int128>(bandwidth_) * (1'000'000'000 + ppb_); }

  GlobalTime g0_;
  std::int64_t bandwidth_;
  std::int64_t ppb_;
  timing::HwTime hw_t0_;
};

}  // namespace rpnc::sim
