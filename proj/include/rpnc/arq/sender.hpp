#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rpnc/arq/rtt.hpp"
#include "rpnc/arq/seq.hpp"
#include "rpnc/link/packet.hpp"

namespace rpnc::arq {

inline constexpr std::size_t kMaxWindow = 127;
/// Expiries double the timer, at most once per timeout interval, until an
/// unambiguous RTT sample arrives.
inline constexpr double kMaxBackoff = 8.0;
/// Ceiling on the timer in force, in slots.
inline constexpr double kMaxRtoSlots = 100.0;

struct ArqConfig {
  bool enabled = true;
  double alpha = 0.125;
  double beta = 0.25;
  double initial_rtt_slots = 4.0;
  double initial_dev_slots = 2.0;
  std::size_t initial_window = 8;
  int ack_delay_slots = 1;
};

struct OutgoingPacket {
  Seq seq = 0;
  std::vector<std::uint8_t> payload;
  bool retransmission = false;
};

struct InFlight {
  double send_time = 0.0;
  std::vector<std::uint8_t> payload;
  int retransmit_count = 0;
  double deadline = 0.0;  // send_time plus the timeout in force when sent
};

struct AckResult {
  std::vector<Seq> acked;
  std::vector<Seq> fast_retransmit;  // always empty: retransmission is timeout-driven
  std::optional<double> rtt_sample;
};

class SendWindow {
 public:
  SendWindow(const ArqConfig& cfg, double slot_duration)
      : cfg_(cfg), t_s_(slot_duration), window_limit_(std::min(cfg.initial_window, kMaxWindow)) {
    rtt_.alpha = cfg.alpha;
    rtt_.beta = cfg.beta;
    rtt_.rtt_est = cfg.initial_rtt_slots * slot_duration;
    rtt_.rtt_dev = cfg.initial_dev_slots * slot_duration;
  }

  void submit(std::vector<std::uint8_t> payload) { queue_.push_back(std::move(payload)); }

  std::size_t queued() const { return queue_.size(); }
  Seq base() const { return in_flight_.empty() ? next_seq_ : std::min(in_flight_.begin()->first, next_seq_); }
  Seq next_seq() const { return next_seq_; }
  std::size_t window_limit() const { return window_limit_; }
  const std::map<Seq, InFlight>& in_flight() const { return in_flight_; }
  const RttEstimator& rtt() const { return rtt_; }
  bool window_full() const { return next_seq_ >= base() + static_cast<Seq>(window_limit_); }
  /// Retransmission timeout in force: the estimator's timeout times the backoff, capped.
  double rto() const { return std::min(rtt_.timeout() * backoff_, kMaxRtoSlots * t_s_); }
  double backoff() const { return backoff_; }

  /// The next packet due now: an expired retransmission first, else new data.
  std::optional<OutgoingPacket> next(double now) {
    for (auto& [seq, f] : in_flight_) {
      if (now > f.deadline) {
        ++f.retransmit_count;
        ++retransmissions_;
        if (!last_backoff_ || now - *last_backoff_ >= rto()) {
          backoff_ = std::min(backoff_ * 2.0, kMaxBackoff);
          last_backoff_ = now;
        }
        f.send_time = now;
        f.deadline = now + rto();
        return OutgoingPacket{seq, f.payload, true};
      }
    }
    if (queue_.empty() || window_full()) return std::nullopt;
    OutgoingPacket p{next_seq_, std::move(queue_.front()), false};
    queue_.pop_front();
    in_flight_[next_seq_] = InFlight{now, p.payload, 0, now + rto()};
    ++next_seq_;
    return p;
  }

  /// Everything due now, at most `max` packets.
  std::vector<OutgoingPacket> on_tick(double now, std::size_t max = SIZE_MAX) {
    std::vector<OutgoingPacket> out;
    while (out.size() < max) {
      auto p = next(now);
      if (!p) break;
      out.push_back(std::move(*p));
    }
    return out;
  }

  AckResult on_ack(double now, std::uint8_t ack_wire, std::span<const link::SackBlock> sack) {
    AckResult res;
    const Seq b = base();
    const Seq cum = from_wire(ack_wire, b - 1);
    if (cum < b - 1 || cum >= next_seq_) return res;
    // Sampled from the most recently sent packet covered; none if that one was retransmitted.
    std::optional<double> latest_send;
    bool ambiguous = false;
    auto take = [&](Seq s) {
      auto it = in_flight_.find(s);
      if (it == in_flight_.end()) return;
      if (!latest_send || it->second.send_time > *latest_send) {
        latest_send = it->second.send_time;
        ambiguous = it->second.retransmit_count > 0;
      }
      res.acked.push_back(s);
      in_flight_.erase(it);
    };
    while (!in_flight_.empty() && in_flight_.begin()->first <= cum) take(in_flight_.begin()->first);
    for (const auto& blk : sack) {
      const Seq start = from_wire(blk.start_seq, cum + 1);
      if (start <= cum || start + blk.length > next_seq_) continue;
      for (Seq s = start; s < start + blk.length; ++s) take(s);
    }
    if (latest_send && !ambiguous && now > *latest_send) {
      res.rtt_sample = now - *latest_send;
      rtt_ = update_rtt(rtt_, *res.rtt_sample);
      window_limit_ = std::min(window_size(rtt_, t_s_), kMaxWindow);
      backoff_ = 1.0;
    }
    std::sort(res.acked.begin(), res.acked.end());
    return res;
  }

  std::uint64_t retransmissions() const { return retransmissions_; }

 private:
  ArqConfig cfg_;
  double t_s_;
  RttEstimator rtt_;
  std::size_t window_limit_;
  std::deque<std::vector<std::uint8_t>> queue_;
  std::map<Seq, InFlight> in_flight_;
  Seq next_seq_ = 0;
  std::uint64_t retransmissions_ = 0;
  double backoff_ = 1.0;
  std::optional<double> last_backoff_;
};

}  // namespace rpnc::arq
