#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

#include "rpnc/sim/config.hpp"

namespace rpnc::sim {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {
inline void put_u64(std::vector<std::uint8_t>& b, std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint64_t get_u64(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}
}  // namespace detail

inline constexpr std::uint8_t kKindData = 'D';
inline constexpr std::uint8_t kKindPing = 'P';
inline constexpr std::uint8_t kKindEcho = 'E';

/// Payload layout: kind, direction, index (u64 LE), stamp (u64 LE), then filler
/// derived from (seed, direction, index) so the receiver can check every byte.
inline std::vector<std::uint8_t> make_payload(std::uint64_t seed, std::uint8_t kind, std::uint8_t dir,
                                              std::uint64_t index, std::uint64_t stamp, std::size_t size) {
  std::vector<std::uint8_t> p(size, 0);
  p[0] = kind;
  p[1] = dir;
  detail::put_u64(p, 2, index);
  detail::put_u64(p, 10, stamp);
  std::uint64_t s = seed ^ (static_cast<std::uint64_t>(dir) << 56) ^ (index * 0x100000001B3ULL);
  for (std::size_t i = 18; i < size; i += 8) {
    const auto r = splitmix64(s);
    for (std::size_t k = 0; k < 8 && i + k < size; ++k) p[i + k] = static_cast<std::uint8_t>(r >> (8 * k));
  }
  return p;
}

struct PayloadInfo {
  std::uint8_t kind = 0;
  std::uint8_t dir = 0;
  std::uint64_t index = 0;
  std::uint64_t stamp = 0;
};

inline std::optional<PayloadInfo> parse_payload(const std::vector<std::uint8_t>& p) {
  if (p.size() < 18) return std::nullopt;
  return PayloadInfo{p[0], p[1], detail::get_u64(p, 2), detail::get_u64(p, 10)};
}

/// True when every byte matches what make_payload would produce.
inline bool payload_intact(std::uint64_t seed, const std::vector<std::uint8_t>& p, std::size_t size) {
  const auto info = parse_payload(p);
  if (!info || p.size() != size) return false;
  return p == make_payload(seed, info->kind, info->dir, info->index, info->stamp, size);
}

/// Application source at one end node.
class TrafficGen {
 public:
  TrafficGen(const TrafficSettings& t, std::uint64_t seed, std::uint8_t dir, bool active)
      : t_(t), seed_(seed), dir_(dir), active_(active) {}

  bool exhausted() const {
    if (!active_ || t_.mode == TrafficMode::Echo) return true;
    return t_.count > 0 && offered_ >= static_cast<std::uint64_t>(t_.count);
  }
  std::uint64_t offered() const { return offered_; }

  /// Next data payload for saturated or stream traffic.
  std::optional<std::vector<std::uint8_t>> offer() {
    if (exhausted()) return std::nullopt;
    return make_payload(seed_, kKindData, dir_, offered_++, 0, t_.payload_size);
  }

  std::vector<std::uint8_t> ping(std::uint64_t stamp) {
    ++offered_;
    return make_payload(seed_, kKindPing, dir_, pings_++, stamp, t_.payload_size);
  }

  std::vector<std::uint8_t> echo(const PayloadInfo& ping) {
    ++offered_;
    return make_payload(seed_, kKindEcho, dir_, ping.index, ping.stamp, t_.payload_size);
  }

 private:
  TrafficSettings t_;
  std::uint64_t seed_;
  std::uint8_t dir_;
  bool active_;
  std::uint64_t offered_ = 0;
  std::uint64_t pings_ = 0;
};

/// Receiver-side integrity and ordering check of one direction's data.
class StreamChecker {
 public:
  StreamChecker(std::uint64_t seed, std::size_t size) : seed_(seed), size_(size) {}

  void on_delivery(const std::vector<std::uint8_t>& p) {
    ++delivered_;
    if (!payload_intact(seed_, p, size_)) {
      ++corrupt_;
      return;
    }
    const auto info = *parse_payload(p);
    if (info.kind != kKindData) return;
    if (info.index < next_) ++duplicates_;
    else if (info.index > next_) ++gaps_, next_ = info.index + 1;
    else ++next_;
  }

  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t corrupt() const { return corrupt_; }
  std::uint64_t duplicates() const { return duplicates_; }
  std::uint64_t gaps() const { return gaps_; }
  std::uint64_t next_index() const { return next_; }

 private:
  std::uint64_t seed_;
  std::size_t size_;
  std::uint64_t next_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t corrupt_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t gaps_ = 0;
};

}  // namespace rpnc::sim
