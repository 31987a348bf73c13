#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "rpnc/common.hpp"

namespace rpnc::baseband {

/// A contiguous run of samples addressed by absolute tick.
struct SampleStream {
  std::vector<Complex> samples;
  std::int64_t origin_tick = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
  std::int64_t end_tick() const { return origin_tick + size(); }

  bool contains(std::int64_t tick, std::int64_t len) const {
    return len >= 0 && tick >= origin_tick && tick + len <= end_tick();
  }

  const Complex& at(std::int64_t tick) const {
    return samples[static_cast<std::size_t>(tick - origin_tick)];
  }
  Complex& at(std::int64_t tick) {
    return samples[static_cast<std::size_t>(tick - origin_tick)];
  }

  std::span<const Complex> view(std::int64_t tick, std::int64_t len) const {
    if (!contains(tick, len)) throw RangeError("sample stream: view out of bounds");
    return {samples.data() + (tick - origin_tick), static_cast<std::size_t>(len)};
  }

  /// Adds `other` into this stream where they overlap.
  void accumulate(const SampleStream& other, Complex gain = 1.0) {
    std::int64_t lo = std::max(origin_tick, other.origin_tick);
    std::int64_t hi = std::min(end_tick(), other.end_tick());
    for (std::int64_t t = lo; t < hi; ++t) at(t) += gain * other.at(t);
  }
};

}  // namespace rpnc::baseband
