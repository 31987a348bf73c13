#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "rpnc/arq/endpoint.hpp"
#include "rpnc/baseband/framesync.hpp"
#include "rpnc/link/packet.hpp"
#include "rpnc/timing/slot_schedule.hpp"

namespace rpnc::mac {

using timing::HwTime;

enum class RxState : std::uint8_t { Init, Sync };

struct EndNodeConfig {
  Role role = Role::EndNodeA;
  int window = 10;
  int tx_gap = 10;
  HwTime slot_duration = HwTime{1'000'000};
  std::int64_t bandwidth = 5'000'000;
  std::size_t data_size = link::kDefaultDataSize;
  bool realign = true;
  bool ts_mode = false;  // A sends in even local slots, B in odd ones
};

struct UplinkTx {
  std::int64_t slot = 0;
  std::vector<std::uint8_t> image;
};

struct SlotOutcome {
  std::int64_t slot = 0;
  bool reference = false;
  std::optional<std::int64_t> window_delta;  // set at the trigger slot
  bool sync_lost = false;
};

struct DownlinkResult {
  link::DownlinkKind kind = link::DownlinkKind::Beacon;
  bool crc_ok = false;
  bool own_missing = false;
  std::optional<link::DecodedPacket> packet;  // the other node's packet
};

struct FlowchartResult {
  RxState state_before = RxState::Init;
  std::optional<baseband::Detection> detection;
  baseband::CorrelatorCost cost;
  std::optional<SlotOutcome> outcome;
};

/// End-node MAC: slot timing, transceiver queues and downlink handling.
class EndNodeMac {
 public:
  EndNodeMac(const EndNodeConfig& cfg, HwTime hw_t0)
      : cfg_(cfg), counter_(hw_t0, cfg.bandwidth) {
    if (cfg.role == Role::Relay) throw ParameterError("EndNodeMac: role must be an end node");
    if (cfg.tx_gap < 0) throw ParameterError("EndNodeMac: tx_gap must be >= 0");
  }

  const EndNodeConfig& config() const { return cfg_; }
  Role role() const { return cfg_.role; }
  RxState rx_state() const { return state_; }
  const timing::SampleCounter& counter() const { return counter_; }
  timing::SampleCounter& counter() { return counter_; }
  const std::optional<timing::SlotSchedule>& schedule() const { return sched_; }
  std::int64_t slots_since_ref() const { return slots_since_ref_; }
  std::size_t tx_que_pkt_size() const { return tx_que_pkt_.size(); }
  std::size_t tx_que_sample_size() const { return tx_que_sample_.size(); }
  std::size_t queue_depth() const { return tx_que_pkt_.size() + tx_que_sample_.size(); }
  std::deque<link::DecodedPacket>& rx_que_pkt() { return rx_que_pkt_; }

  /// Tick at which slot n starts.
  std::int64_t boundary_tick(std::int64_t n) const { return counter_.tick_of(sched_.value().boundary(n)); }

  /// A reference packet starting at `ref_tick` fixes S_0 and enters SYNC.
  void acquire(std::int64_t ref_tick) {
    sched_.emplace(counter_.arrival(ref_tick), cfg_.slot_duration, cfg_.window, counter_.period());
    state_ = RxState::Sync;
    slots_since_ref_ = 0;
    ++acquisitions_;
  }

  /// RX path reached slot n; `ref_tick` is the narrow-search hit, if any.
  SlotOutcome on_slot_boundary(std::int64_t n, std::optional<std::int64_t> ref_tick) {
    if (state_ != RxState::Sync) throw SequencingError("on_slot_boundary: not synchronised");
    auto& s = *sched_;
    s.note_slot(n);
    SlotOutcome out;
    out.slot = n;
    if (ref_tick) {
      s.record_arrival({n, counter_.arrival(*ref_tick)});
      slots_since_ref_ = 0;
      out.reference = true;
    } else {
      ++slots_since_ref_;
    }
    if (n == s.trigger_slot()) {
      const std::int64_t d = s.window_drift();
      s.realign(cfg_.realign ? d : 0);
      out.window_delta = d;
    }
    if (timing::check_sync_loss(slots_since_ref_, std::max(cfg_.tx_gap, 1))) {
      state_ = RxState::Init;
      sched_.reset();
      out.sync_lost = true;
      ++sync_losses_;
    }
    return out;
  }

  /// One pass of the receiver flowchart over `window`. INIT runs the standard
  /// detector and acquires on the first relay preamble; SYNC runs the narrow
  /// search at slot n.
  FlowchartResult rx_flowchart_step(const baseband::SampleStream& window, const baseband::FramePreamble& relay,
                                    std::int64_t n, const baseband::SyncThresholds& th = {}) {
    FlowchartResult res;
    res.state_before = state_;
    if (state_ == RxState::Init) {
      auto r = baseband::sync_standard(window, {relay}, th);
      res.cost = r.cost;
      if (!r.detections.empty()) {
        res.detection = r.detections.front();
        acquire(res.detection->start_tick);
      }
      return res;
    }
    auto r = baseband::sync_narrow(window, relay, boundary_tick(n), th);
    res.cost = r.cost;
    res.detection = r.detection;
    res.outcome = on_slot_boundary(n, r.detection ? std::optional(r.detection->start_tick) : std::nullopt);
    return res;
  }

  /// Encodes a link packet into tx_que_pkt, stamping the next slot ID.
  const std::vector<std::uint8_t>& enqueue_packet(link::LinkHeader h, const std::vector<std::uint8_t>& payload) {
    const auto id = static_cast<std::uint8_t>(tx_count_ % 255 + 1);
    ++tx_count_;
    h.slot_id_a = cfg_.role == Role::EndNodeA ? id : 0;
    h.slot_id_b = cfg_.role == Role::EndNodeB ? id : 0;
    tx_que_pkt_.push_back(link::encode_packet(h, payload, cfg_.data_size));
    return tx_que_pkt_.back();
  }

  /// Host encoding of the oldest packet finished.
  void on_encode_done() {
    if (tx_que_pkt_.empty()) throw SequencingError("on_encode_done: nothing being encoded");
    tx_que_sample_.push_back(std::move(tx_que_pkt_.front()));
    tx_que_pkt_.pop_front();
  }

  /// A detection of slot n schedules slot `target` (one-slot-ahead: n+1).
  std::optional<UplinkTx> on_slot_detect(std::int64_t n, std::optional<std::int64_t> target = std::nullopt) {
    const std::int64_t m = target.value_or(n + 1);
    if (m <= n) throw SequencingError("on_slot_detect: target slot must follow the detected one");
    if (state_ != RxState::Sync || tx_que_sample_.empty()) return std::nullopt;
    if (cfg_.ts_mode && (m % 2 == 0) != (cfg_.role == Role::EndNodeA)) return std::nullopt;
    UplinkTx tx{m, std::move(tx_que_sample_.front())};
    tx_que_sample_.pop_front();
    const auto id = tx.image[cfg_.role == Role::EndNodeA ? 0 : 1];
    ring_[id] = tx.image;
    return tx;
  }

  DownlinkResult on_downlink(const std::vector<std::uint8_t>& image) {
    DownlinkResult res;
    if (image.size() != link::packet_size(cfg_.data_size)) throw FormatError("on_downlink: wrong image size");
    res.kind = link::classify_downlink(image[0], image[1], cfg_.role);
    const std::vector<std::uint8_t>* other = &image;
    std::vector<std::uint8_t> extracted;
    if (res.kind == link::DownlinkKind::XorPacket) {
      const auto& own = ring_[image[cfg_.role == Role::EndNodeA ? 0 : 1]];
      if (own.size() != image.size()) {
        res.own_missing = true;
        return res;
      }
      extracted = link::xor_extract(image, own);
      other = &extracted;
    }
    res.crc_ok = link::image_crc_ok(*other, cfg_.data_size);
    if (!res.crc_ok) return res;
    if (res.kind == link::DownlinkKind::XorPacket || res.kind == link::DownlinkKind::FromOther) {
      res.packet = link::decode_packet(*other, cfg_.data_size);
      rx_que_pkt_.push_back(*res.packet);
    }
    return res;
  }

  std::uint64_t sync_losses() const { return sync_losses_; }
  std::uint64_t acquisitions() const { return acquisitions_; }

 private:
  EndNodeConfig cfg_;
  timing::SampleCounter counter_;
  RxState state_ = RxState::Init;
  std::optional<timing::SlotSchedule> sched_;
  std::int64_t slots_since_ref_ = 0;
  std::deque<std::vector<std::uint8_t>> tx_que_pkt_;
  std::deque<std::vector<std::uint8_t>> tx_que_sample_;
  std::deque<link::DecodedPacket> rx_que_pkt_;
  std::array<std::vector<std::uint8_t>, 256> ring_;
  std::uint64_t tx_count_ = 0;
  std::uint64_t sync_losses_ = 0;
  std::uint64_t acquisitions_ = 0;
};

}  // namespace rpnc::mac
