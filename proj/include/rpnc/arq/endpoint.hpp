#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpnc/arq/receiver.hpp"
#include "rpnc/arq/sender.hpp"

namespace rpnc::arq {

/// Header fields carrying feedback and, when present, a data sequence.
inline link::LinkHeader build_feedback(const RecvBuffer& r, std::optional<Seq> data_seq, bool with_ack = true) {
  link::LinkHeader h;
  if (with_ack) {
    h.ack_flag = true;
    h.ack_no = r.ack_no();
    h.sack_blocks = r.sack_blocks();
  }
  if (data_seq) {
    h.seq_flag = true;
    h.seq_no = to_wire(*data_seq);
  }
  return h;
}

struct LinkOut {
  link::LinkHeader header;
  std::vector<std::uint8_t> payload;
  bool retransmission = false;
};

struct TraceRow {
  double time;
  std::string node;
  std::string dir;  // tx or rx
  link::LinkHeader header;
  bool retransmission;
};

class ArqTrace {
 public:
  void add(TraceRow r) { rows_.push_back(std::move(r)); }
  const std::vector<TraceRow>& rows() const { return rows_; }

  void write_csv(std::ostream& os) const {
    os << "time_s,node,dir,seq_flag,seq,ack_flag,ack,sack,retransmit\n";
    for (const auto& r : rows_) {
      os << r.time << ',' << r.node << ',' << r.dir << ',' << r.header.seq_flag << ',' << int(r.header.seq_no) << ','
         << r.header.ack_flag << ',' << int(r.header.ack_no) << ',';
      for (std::size_t i = 0; i < r.header.sack_blocks.size(); ++i)
        os << (i ? ";" : "") << int(r.header.sack_blocks[i].start_seq) << ':' << int(r.header.sack_blocks[i].length);
      os << ',' << r.retransmission << '\n';
    }
  }

 private:
  std::vector<TraceRow> rows_;
};

/// One end node's ARQ state: sender, receiver and ACK scheduling.
class ArqEndpoint {
 public:
  ArqEndpoint(const ArqConfig& cfg, double slot_duration) : cfg_(cfg), sender_(cfg, slot_duration) {}

  SendWindow& sender() { return sender_; }
  const SendWindow& sender() const { return sender_; }
  const RecvBuffer& receiver() const { return receiver_; }
  bool enabled() const { return cfg_.enabled; }
  bool feedback_pending() const { return pending_; }

  void submit(std::vector<std::uint8_t> payload) {
    if (cfg_.enabled) sender_.submit(std::move(payload));
    else plain_queue_.push_back(std::move(payload));
  }
  std::size_t queued() const { return cfg_.enabled ? sender_.queued() : plain_queue_.size(); }

  /// Ages pending feedback by one slot.
  void on_slot() {
    if (pending_) ++pending_age_;
  }

  /// The next link packet to hand to the MAC, if any.
  std::optional<LinkOut> next_packet(double now) {
    if (!cfg_.enabled) {
      if (plain_queue_.empty()) return std::nullopt;
      LinkOut out;
      out.header.seq_flag = true;
      out.header.seq_no = to_wire(plain_seq_++);
      out.payload = std::move(plain_queue_.front());
      plain_queue_.pop_front();
      return out;
    }
    if (auto p = sender_.next(now)) {
      LinkOut out{build_feedback(receiver_, p->seq, receiver_.received_any()), std::move(p->payload),
                  p->retransmission};
      clear_pending();
      return out;
    }
    if (pending_ && pending_age_ >= cfg_.ack_delay_slots) {
      LinkOut out{build_feedback(receiver_, std::nullopt), {}, false};
      clear_pending();
      return out;
    }
    return std::nullopt;
  }

  struct Incoming {
    std::vector<Delivered> delivered;
    AckResult ack;
    bool duplicate = false;
  };

  Incoming on_packet(double now, const link::LinkHeader& h, std::vector<std::uint8_t> payload) {
    Incoming in;
    if (!cfg_.enabled) {
      if (h.seq_flag) in.delivered.push_back({plain_rx_++, std::move(payload)});
      return in;
    }
    if (h.ack_flag) in.ack = sender_.on_ack(now, h.ack_no, h.sack_blocks);
    if (h.seq_flag) {
      auto r = receiver_.on_data(h.seq_no, std::move(payload));
      in.delivered = std::move(r.delivered);
      in.duplicate = r.duplicate;
      if (!pending_) pending_age_ = 0;
      pending_ = true;
    }
    return in;
  }

 private:
  void clear_pending() {
    pending_ = false;
    pending_age_ = 0;
  }

  ArqConfig cfg_;
  SendWindow sender_;
  RecvBuffer receiver_;
  bool pending_ = false;
  int pending_age_ = 0;
  std::deque<std::vector<std::uint8_t>> plain_queue_;
  Seq plain_seq_ = 0;
  Seq plain_rx_ = 0;
};

}  // namespace rpnc::arq
