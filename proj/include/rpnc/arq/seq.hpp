#pragma once

#include <cstdint>

namespace rpnc::arq {

/// Sequence numbers are unbounded internally and 8 bits on the wire.
using Seq = std::int64_t;

inline std::uint8_t to_wire(Seq s) { return static_cast<std::uint8_t>(s & 0xFF); }

/// The absolute sequence closest to `ref` whose low byte is `wire`.
inline Seq from_wire(std::uint8_t wire, Seq ref) {
  const auto diff = static_cast<std::int8_t>(static_cast<std::uint8_t>(wire - to_wire(ref)));
  return ref + diff;
}

}  // namespace rpnc::arq
