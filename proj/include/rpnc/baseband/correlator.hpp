#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rpnc/baseband/sample_stream.hpp"

namespace rpnc::baseband {

/// Complex arithmetic spent by a correlator. Energy normalisation uses real
/// squares and is not counted.
struct CorrelatorCost {
  std::uint64_t complex_multiplies = 0;
  std::uint64_t complex_adds = 0;

  CorrelatorCost& operator+=(const CorrelatorCost& o) {
    complex_multiplies += o.complex_multiplies;
    complex_adds += o.complex_adds;
    return *this;
  }
};

struct CrossCorrPeak {
  std::int64_t peak_tick = -1;  // tick where the reference sequence starts
  double peak_magnitude = 0.0;
  double normalized = 0.0;      // |c| / sqrt(E_y * E_x) at the peak
  CorrelatorCost cost;
};

inline double energy(std::span<const Complex> x) {
  double e = 0.0;
  for (auto v : x) e += std::norm(v);
  return e;
}

/// Sliding cross-correlation of `x` against `y` for match starts in
/// [search_start, search_start + search_len).
inline CrossCorrPeak cross_correlate(const SampleStream& y, std::span<const Complex> x,
                                     std::int64_t search_start, std::int64_t search_len) {
  const auto len = static_cast<std::int64_t>(x.size());
  if (search_len <= 0 || len == 0) throw RangeError("cross_correlate: empty search");
  if (!y.contains(search_start, search_len - 1 + len))
    throw RangeError("cross_correlate: search window outside stream");

  CrossCorrPeak out;
  const double ex = energy(x);
  const Complex* base = y.samples.data() + (search_start - y.origin_tick);
  double ey = energy({base, static_cast<std::size_t>(len)});
  for (std::int64_t k = 0; k < search_len; ++k) {
    if (k > 0) ey += std::norm(base[k + len - 1]) - std::norm(base[k - 1]);
    Complex c = 0.0;
    for (std::int64_t i = 0; i < len; ++i) c += base[k + i] * std::conj(x[static_cast<std::size_t>(i)]);
    const double mag = std::abs(c);
    if (out.peak_tick < 0 || mag > out.peak_magnitude) {
      out.peak_tick = search_start + k;
      out.peak_magnitude = mag;
      out.normalized = (ey > 1e-300 && ex > 0) ? mag / std::sqrt(std::max(ey, 0.0) * ex) : 0.0;
    }
  }
  out.cost.complex_multiplies = static_cast<std::uint64_t>(search_len * len);
  out.cost.complex_adds = static_cast<std::uint64_t>(search_len * (len - 1));
  return out;
}

/// Window energy below which a half-window counts as silence.
inline constexpr double kSilenceEnergy = 1e-9;

inline double autocorr_metric(Complex a, double p_early, double p_late) {
  if (p_early < kSilenceEnergy || p_late < kSilenceEnergy) return 0.0;
  return std::abs(a) / std::sqrt(p_early * p_late);
}

/// Streaming lag-L autocorrelation with O(1) update per sample.
class AutoCorrelator {
 public:
  explicit AutoCorrelator(std::size_t sts_len) : len_(sts_len), hist_(2 * sts_len) {}

  /// Pushes one sample; returns true once a[n] is defined.
  bool push(Complex v) {
    const std::size_t cap = hist_.size();
    hist_[count_ % cap] = v;
    ++count_;
    if (count_ < cap) return false;
    auto y = [&](std::size_t back) { return hist_[(count_ - 1 - back) % cap]; };
    if (count_ == cap) {
      value_ = 0.0;
      power_ = 0.0;
      early_ = 0.0;
      for (std::size_t i = 0; i < len_; ++i) {
        value_ += y(2 * len_ - 1 - i) * std::conj(y(len_ - 1 - i));
        power_ += std::norm(y(len_ - 1 - i));
        early_ += std::norm(y(2 * len_ - 1 - i));
      }
      cost_.complex_multiplies += len_;
      cost_.complex_adds += len_ - 1;
    } else {
      // a[n] = a[n-1] + y[n-L]y*[n] - y[n-2L]y*[n-L]
      value_ += y(len_) * std::conj(y(0)) - oldest_ * std::conj(y(len_));
      power_ += std::norm(y(0)) - std::norm(y(len_));
      early_ += std::norm(y(len_)) - std::norm(oldest_);
      cost_.complex_multiplies += 2;
      cost_.complex_adds += 2;
    }
    oldest_ = y(2 * len_ - 1);
    return true;
  }

  Complex value() const { return value_; }
  /// Energy of the later half of the window.
  double power() const { return std::max(power_, 0.0); }
  /// Energy of the earlier half of the window.
  double power_early() const { return std::max(early_, 0.0); }
  /// |a| / sqrt(P_early P_late), in [0, 1].
  double metric() const { return autocorr_metric(value_, power_early(), power()); }
  const CorrelatorCost& cost() const { return cost_; }

 private:
  std::size_t len_;
  std::vector<Complex> hist_;
  std::size_t count_ = 0;
  Complex value_ = 0.0;
  double power_ = 0.0;
  double early_ = 0.0;
  Complex oldest_ = 0.0;
  CorrelatorCost cost_;
};

struct AutoCorrelation {
  std::int64_t first_tick = 0;  // tick n of values[0]; the window is [n-2L+1, n]
  std::vector<Complex> values;
  std::vector<double> power;        // later half
  std::vector<double> power_early;  // earlier half
  CorrelatorCost cost;

  double metric(std::size_t j) const { return autocorr_metric(values[j], power_early[j], power[j]); }
};

inline AutoCorrelation auto_correlate_stream(const SampleStream& y, std::size_t sts_len) {
  if (sts_len == 0 || y.samples.size() < 2 * sts_len)
    throw RangeError("auto_correlate_stream: stream shorter than 2L");
  AutoCorrelator ac(sts_len);
  AutoCorrelation out;
  out.first_tick = y.origin_tick + static_cast<std::int64_t>(2 * sts_len) - 1;
  out.values.reserve(y.samples.size() - 2 * sts_len + 1);
  out.power.reserve(out.values.capacity());
  out.power_early.reserve(out.values.capacity());
  for (auto v : y.samples) {
    if (ac.push(v)) {
      out.values.push_back(ac.value());
      out.power.push_back(ac.power());
      out.power_early.push_back(ac.power_early());
    }
  }
  out.cost = ac.cost();
  return out;
}

}  // namespace rpnc::baseband
