#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

#include "rpnc/common.hpp"

namespace rpnc::timing {

/// Hardware time in 10 ns units. Used for instants and durations alike.
struct HwTime {
  static constexpr std::int64_t kUnitsPerSecond = 100'000'000;

  std::int64_t units = 0;

  static constexpr HwTime from_units(std::int64_t u) { return HwTime{u}; }
  static HwTime from_seconds(double s) {
    return HwTime{static_cast<std::int64_t>(std::llround(s * static_cast<double>(kUnitsPerSecond)))};
  }
  double seconds() const { return static_cast<double>(units) / static_cast<double>(kUnitsPerSecond); }

  friend constexpr HwTime operator+(HwTime a, HwTime b) { return {a.units + b.units}; }
  friend constexpr HwTime operator-(HwTime a, HwTime b) { return {a.units - b.units}; }
  friend constexpr HwTime operator*(HwTime a, std::int64_t k) { return {a.units * k}; }
  friend constexpr HwTime operator*(std::int64_t k, HwTime a) { return {a.units * k}; }
  HwTime& operator+=(HwTime o) { units += o.units; return *this; }
  friend constexpr auto operator<=>(HwTime, HwTime) = default;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Duration of one sample; the bandwidth must divide 1e8.
inline HwTime sample_period(std::int64_t bandwidth) {
  if (bandwidth <= 0 || HwTime::kUnitsPerSecond % bandwidth != 0)
    throw ParameterError("bandwidth must be a positive divisor of 1e8 samples/s");
  return HwTime{HwTime::kUnitsPerSecond / bandwidth};
}

/// T = T0 + N/B, rounded to the 10 ns resolution.
inline HwTime sample_count_arrival(std::int64_t n_samples, HwTime t0, std::int64_t bandwidth) {
  if (bandwidth <= 0) throw ParameterError("sample_count_arrival: bandwidth must be positive");
  const __int128 num = static_cast<__int128>(n_samples) * HwTime::kUnitsPerSecond;
  const __int128 q = (num + bandwidth / 2) / bandwidth;
  return t0 + HwTime{static_cast<std::int64_t>(q)};
}

/// Sample counter of one receiver; re-anchoring restarts the count from a new T0.
class SampleCounter {
 public:
  SampleCounter(HwTime t0, std::int64_t bandwidth) : t0_(t0), bandwidth_(bandwidth), period_(sample_period(bandwidth)) {}

  HwTime t0() const { return t0_; }
  std::int64_t bandwidth() const { return bandwidth_; }
  HwTime period() const { return period_; }
  std::int64_t anchor_tick() const { return anchor_; }

  /// Hardware time of absolute tick `tick`.
  HwTime arrival(std::int64_t tick) const {
    return sample_count_arrival(tick - anchor_, t0_, bandwidth_);
  }

  /// Tick whose arrival time is `t`; `t` must fall on a sample.
  std::int64_t tick_of(HwTime t) const {
    const std::int64_t d = (t - t0_).units;
    if (d % period_.units != 0) throw RangeError("SampleCounter: time not on a sample boundary");
    return anchor_ + d / period_.units;
  }

  /// Counting restarts at `tick` with hardware time `new_t0`.
  void reanchor(std::int64_t tick, HwTime new_t0) {
    anchor_ = tick;
    t0_ = new_t0;
  }

 private:
  HwTime t0_;
  std::int64_t bandwidth_;
  HwTime period_;
  std::int64_t anchor_ = 0;
};

}  // namespace rpnc::timing
