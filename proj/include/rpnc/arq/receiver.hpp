#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rpnc/arq/seq.hpp"
#include "rpnc/link/packet.hpp"

namespace rpnc::arq {

struct Delivered {
  Seq seq = 0;
  std::vector<std::uint8_t> payload;
};

struct ReceiveResult {
  std::vector<Delivered> delivered;
  std::uint8_t ack_no = 0;
  std::vector<link::SackBlock> sack;
  bool duplicate = false;
};

class RecvBuffer {
 public:
  Seq expected() const { return expected_; }
  std::uint8_t ack_no() const { return to_wire(expected_ - 1); }
  const std::map<Seq, std::vector<std::uint8_t>>& out_of_order() const { return buffer_; }
  bool received_any() const { return received_any_; }

  /// Maximal runs of buffered sequences, nearest to the cumulative ack first.
  std::vector<link::SackBlock> sack_blocks() const {
    std::vector<link::SackBlock> out;
    auto it = buffer_.begin();
    while (it != buffer_.end() && out.size() < link::kMaxSackBlocks) {
      const Seq start = it->first;
      Seq end = start;
      ++it;
      while (it != buffer_.end() && it->first == end + 1 && end + 1 - start < 255) { end = it->first; ++it; }
      out.push_back({to_wire(start), static_cast<std::uint8_t>(end - start + 1)});
    }
    return out;
  }

  ReceiveResult on_data(std::uint8_t seq_wire, std::vector<std::uint8_t> payload) {
    received_any_ = true;
    ReceiveResult res;
    const Seq s = from_wire(seq_wire, expected_);
    if (s < expected_ || buffer_.count(s) != 0) {
      res.duplicate = true;
    } else if (s == expected_) {
      res.delivered.push_back({s, std::move(payload)});
      ++expected_;
      for (auto it = buffer_.find(expected_); it != buffer_.end(); it = buffer_.find(expected_)) {
        res.delivered.push_back({expected_, std::move(it->second)});
        buffer_.erase(it);
        ++expected_;
      }
    } else {
      buffer_.emplace(s, std::move(payload));
    }
    res.ack_no = ack_no();
    res.sack = sack_blocks();
    return res;
  }

 private:
  Seq expected_ = 0;
  bool received_any_ = false;
  std::map<Seq, std::vector<std::uint8_t>> buffer_;
};

}  // namespace rpnc::arq
