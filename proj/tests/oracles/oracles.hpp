#pragma once

// Independent reference implementations used to check the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

/// a[n] = sum_{i=1..L} y[n-2L+i] conj(y[n-L+i]), n indexing into `y`.
inline Complex direct_autocorr(std::span<const Complex> y, std::size_t len, std::size_t n) {
  Complex a = 0.0;
  for (std::size_t i = 1; i <= len; ++i) a += y[n - 2 * len + i] * std::conj(y[n - len + i]);
  return a;
}

inline Complex direct_crosscorr(std::span<const Complex> y, std::span<const Complex> x, std::size_t start) {
  Complex c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) c += y[start + i] * std::conj(x[i]);
  return c;
}

inline std::vector<Complex> naive_dft(std::span<const Complex> x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t t = 0; t < n; ++t)
      out[k] += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % n) / double(n));
  return out;
}

/// CRC-32 by literal GF(2) long division: complement of
/// (x^32 M(x) + x^k (x^31 + ... + 1)) mod G(x), bits sent LSB first per byte,
/// FCS value bit 0 holding the x^31 coefficient.
inline std::uint32_t bitserial_crc32(std::span<const std::uint8_t> bytes) {
  const std::size_t k = bytes.size() * 8;
  std::vector<std::uint8_t> poly(k + 32, 0);  // index = degree
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint8_t bit = (bytes[i / 8] >> (i % 8)) & 1u;
    poly[k + 31 - i] ^= bit;
  }
  for (std::size_t d = k; d < k + 32; ++d) poly[d] ^= 1;
  const std::uint64_t g = 0x104C11DB7ull;
  for (std::size_t d = k + 31; d >= 32; --d) {
    if (!poly[d]) continue;
    for (int j = 0; j <= 32; ++j)
      if ((g >> j) & 1u) poly[d - 32 + static_cast<std::size_t>(j)] ^= 1;
  }
  std::uint32_t v = 0;
  for (int j = 0; j < 32; ++j)
    if (!poly[static_cast<std::size_t>(j)]) v |= 1u << (31 - j);
  return v;
}

/// Remainder of x^32 P(x) mod G(x) with no preset and no complement.
inline std::uint32_t bitserial_crc32_plain(std::span<const std::uint8_t> bytes) {
  const std::size_t k = bytes.size() * 8;
  std::vector<std::uint8_t> poly(k + 32, 0);
  for (std::size_t i = 0; i < k; ++i) poly[k + 31 - i] = (bytes[i / 8] >> (i % 8)) & 1u;
  const std::uint64_t g = 0x104C11DB7ull;
  for (std::size_t d = k + 31; d >= 32; --d) {
    if (!poly[d]) continue;
    for (int j = 0; j <= 32; ++j)
      if ((g >> j) & 1u) poly[d - 32 + static_cast<std::size_t>(j)] ^= 1;
  }
  std::uint32_t v = 0;
  for (int j = 0; j < 32; ++j)
    if (poly[static_cast<std::size_t>(j)]) v |= 1u << (31 - j);
  return v;
}

}  // namespace oracle
