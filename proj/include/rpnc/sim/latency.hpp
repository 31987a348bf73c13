#pragma once

#include <random>

#include "rpnc/common.hpp"

namespace rpnc::sim {

struct HostLatency {
  double delta = 0.0;  // USRP -> PC
  double phi = 0.0;    // PC -> USRP
};

/// Independent uniform delta and phi, redrawn until delta + phi < T_s.
class LatencyModel {
 public:
  LatencyModel(double delta_min, double delta_max, double phi_min, double phi_max, double slot_duration)
      : delta_(delta_min, delta_max), phi_(phi_min, phi_max), t_s_(slot_duration) {
    if (delta_min < 0 || phi_min < 0 || delta_max < delta_min || phi_max < phi_min)
      throw ParameterError("LatencyModel: bad bounds");
    if (delta_min + phi_min >= slot_duration)
      throw ParameterError("LatencyModel: delta + phi cannot stay below the slot duration");
  }

  double delta_bound() const { return delta_.b(); }
  double phi_bound() const { return phi_.b(); }

  template <class Rng>
  HostLatency sample(Rng& rng) {
    for (;;) {
      HostLatency l{delta_(rng), phi_(rng)};
      if (l.delta + l.phi < t_s_) return l;
    }
  }

  template <class Rng>
  double sample_delta(Rng& rng) {
    return sample(rng).delta;
  }

 private:
  std::uniform_real_distribution<double> delta_;
  std::uniform_real_distribution<double> phi_;
  double t_s_;
};

}  // namespace rpnc::sim
