#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rpnc/common.hpp"

namespace rpnc::baseband {

/// BPSK: bit b maps to 1 - 2b.
inline double bpsk(std::uint8_t bit) { return bit ? -1.0 : 1.0; }

/// ML decision over the superimposed constellation h_a*s_a + h_b*s_b; returns
/// the XOR of the most likely bit pair per symbol.
inline std::vector<std::uint8_t> xor_demap_bpsk(std::span<const Complex> y, Complex h_a, Complex h_b) {
  if (std::abs(h_a) == 0.0 || std::abs(h_b) == 0.0)
    throw DemapError("xor_demap_bpsk: zero channel gain");
  std::array<Complex, 4> pts;
  std::array<std::uint8_t, 4> xr;
  for (std::uint8_t ba = 0; ba < 2; ++ba)
    for (std::uint8_t bb = 0; bb < 2; ++bb) {
      pts[ba * 2 + bb] = h_a * bpsk(ba) + h_b * bpsk(bb);
      xr[ba * 2 + bb] = ba ^ bb;
    }
  std::vector<std::uint8_t> out;
  out.reserve(y.size());
  for (auto v : y) {
    std::size_t best = 0;
    double dmin = std::norm(v - pts[0]);
    for (std::size_t i = 1; i < 4; ++i) {
      const double d = std::norm(v - pts[i]);
      if (d < dmin) { dmin = d; best = i; }
    }
    out.push_back(xr[best]);
  }
  return out;
}

}  // namespace rpnc::baseband
