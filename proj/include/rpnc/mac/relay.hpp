#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "rpnc/link/packet.hpp"

namespace rpnc::mac {

enum class UplinkKind : std::uint8_t { None, A, B, Both };

constexpr const char* to_string(UplinkKind k) {
  switch (k) {
    case UplinkKind::None: return "none";
    case UplinkKind::A: return "A";
    case UplinkKind::B: return "B";
    case UplinkKind::Both: return "both";
  }
  return "?";
}

/// What the relay's PHY handed up for one uplink slot. For Both, `image` is the
/// superimposed (XOR) image.
struct UplinkReception {
  UplinkKind kind = UplinkKind::None;
  std::vector<std::uint8_t> image;
};

enum class FrameKind : std::uint8_t { Single, Xor, Beacon };

constexpr const char* to_string(FrameKind k) {
  switch (k) {
    case FrameKind::Single: return "single";
    case FrameKind::Xor: return "xor";
    case FrameKind::Beacon: return "beacon";
  }
  return "?";
}

struct RelayConfig {
  int tx_gap = 10;
  bool ts_mode = false;  // single-user decoder only; beacons on even slots
  bool forward = true;
  std::size_t data_size = link::kDefaultDataSize;
};

struct RelayRxResult {
  bool enqueued = false;
  bool crc_ok = false;
  bool collision = false;
};

struct DownlinkDecision {
  std::int64_t slot = 0;  // downlink slot of the emission
  std::optional<FrameKind> kind;
  std::vector<std::uint8_t> image;
};

/// Relay MAC: decode-and-forward once, beacons to bound reference gaps.
class RelayMac {
 public:
  explicit RelayMac(const RelayConfig& cfg) : cfg_(cfg) {
    if (cfg.tx_gap < 0) throw ParameterError("RelayMac: tx_gap must be >= 0");
  }

  const RelayConfig& config() const { return cfg_; }
  std::size_t forward_queue_size() const { return queue_.size(); }
  std::int64_t slots_since_downlink() const { return silent_; }

  RelayRxResult on_uplink(const UplinkReception& rx) {
    RelayRxResult res;
    if (rx.kind == UplinkKind::None || !cfg_.forward) return res;
    if (rx.kind == UplinkKind::Both && cfg_.ts_mode) {
      res.collision = true;
      return res;
    }
    if (rx.kind == UplinkKind::Both) {
      res.crc_ok = link::verify_xor_image(rx.image, cfg_.data_size);
    } else {
      res.crc_ok = link::image_crc_ok(rx.image, cfg_.data_size);
    }
    if (!res.crc_ok) return res;
    queue_.push_back({rx.kind == UplinkKind::Both ? FrameKind::Xor : FrameKind::Single, rx.image});
    res.enqueued = true;
    return res;
  }

  /// Wake-up in slot m: picks the emission for slot m+1.
  DownlinkDecision on_slot(std::int64_t m) {
    DownlinkDecision d;
    d.slot = m + 1;
    if (!queue_.empty()) {
      d.kind = queue_.front().kind;
      d.image = std::move(queue_.front().image);
      queue_.pop_front();
    } else if (silent_ + 1 >= cfg_.tx_gap && (!cfg_.ts_mode || d.slot % 2 == 0)) {
      d.kind = FrameKind::Beacon;
      d.image = link::beacon_image(cfg_.data_size);
    }
    silent_ = d.kind ? 0 : silent_ + 1;
    return d;
  }

 private:
  struct Item {
    FrameKind kind;
    std::vector<std::uint8_t> image;
  };

  RelayConfig cfg_;
  std::deque<Item> queue_;
  std::int64_t silent_ = 1'000'000;
};

}  // namespace rpnc::mac
