#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "rpnc/common.hpp"

namespace rpnc::baseband {

/// OFDM numerology shared by every transmitter.
struct OfdmParams {
  std::size_t n_subcarriers = 64;  // N_s
  std::size_t cp_len = 32;         // C
  std::size_t sts_len = 32;        // L
  std::int64_t bandwidth = 5'000'000;
  std::size_t used_half = 26;      // subcarriers 1 <= |k| <= used_half carry energy

  std::size_t symbol_len() const { return n_subcarriers + cp_len; }

  /// Offset of the first full STS copy inside a 2STS field.
  std::size_t first_peak_offset() const {
    return cp_len >= sts_len ? cp_len - sts_len : cp_len;
  }

  void validate() const {
    if (n_subcarriers == 0 || cp_len == 0 || sts_len == 0 || bandwidth <= 0)
      throw ParameterError("ofdm: all counts must be positive");
    if (cp_len >= n_subcarriers)
      throw ParameterError("ofdm: cp_len must be smaller than n_subcarriers");
    if (2 * sts_len != n_subcarriers)
      throw ParameterError("ofdm: 2STS field must span one symbol (2*sts_len == n_subcarriers)");
    if ((n_subcarriers & (n_subcarriers - 1)) != 0)
      throw ParameterError("ofdm: n_subcarriers must be a power of two");
    if (used_half == 0 || used_half >= n_subcarriers / 2)
      throw ParameterError("ofdm: used_half out of range");
  }
};

/// Signed subcarrier index k in [-N/2, N/2) to FFT bin.
inline std::size_t bin_of(std::int64_t k, std::size_t n) {
  auto nn = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(((k % nn) + nn) % nn);
}

inline std::int64_t subcarrier_of(std::size_t bin, std::size_t n) {
  auto b = static_cast<std::int64_t>(bin);
  auto nn = static_cast<std::int64_t>(n);
  return b >= nn / 2 ? b - nn : b;
}

}  // namespace rpnc::baseband
