#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "rpnc/common.hpp"

namespace rpnc::arq {

struct RttEstimator {
  double rtt_est = 0.0;  // seconds
  double rtt_dev = 0.0;
  double alpha = 0.125;
  double beta = 0.25;

  double timeout() const { return rtt_est + 4.0 * rtt_dev; }
};

/// dev is updated against the estimate from before this sample.
inline RttEstimator update_rtt(RttEstimator est, double sample) {
  if (!(sample > 0.0)) throw MeasurementError("update_rtt: sample must be positive");
  est.rtt_dev = (1.0 - est.beta) * est.rtt_dev + est.beta * std::abs(sample - est.rtt_est);
  est.rtt_est = (1.0 - est.alpha) * est.rtt_est + est.alpha * sample;
  return est;
}

/// ceil(timeout / T_s), at least 1.
inline std::size_t window_size(const RttEstimator& est, double t_s) {
  if (!(t_s > 0.0)) throw ParameterError("window_size: slot duration must be positive");
  const double ratio = est.timeout() / t_s;
  const double w = std::ceil(ratio - 1e-9 * std::max(1.0, std::abs(ratio)));
  return w < 1.0 ? 1 : static_cast<std::size_t>(w);
}

}  // namespace rpnc::arq
