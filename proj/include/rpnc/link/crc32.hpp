#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace rpnc::link {

namespace detail {

inline constexpr std::uint32_t kReflectedPoly = 0xEDB88320u;

inline constexpr std::array<std::uint32_t, 256> make_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? (c >> 1) ^ kReflectedPoly : c >> 1;
    t[i] = c;
  }
  return t;
}

inline constexpr auto kTable = make_table();

inline std::uint32_t crc_register(std::span<const std::uint8_t> bytes, std::uint32_t reg) {
  for (auto b : bytes) reg = kTable[(reg ^ b) & 0xFFu] ^ (reg >> 8);
  return reg;
}

}  // namespace detail

/// IEEE 802.11 FCS: preset all-ones register, final complement.
inline std::uint32_t crc32_dot11(std::span<const std::uint8_t> bytes) {
  return ~detail::crc_register(bytes, 0xFFFFFFFFu);
}

/// Plain remainder P(x) x^32 mod G(x), without preset or complement.
inline std::uint32_t crc32_raw(std::span<const std::uint8_t> bytes) {
  return detail::crc_register(bytes, 0u);
}

}  // namespace rpnc::link
