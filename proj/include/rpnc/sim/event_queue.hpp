#pragma once

#include <cstdint>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "rpnc/sim/clock.hpp"

namespace rpnc::sim {

enum class EventKind : std::uint8_t {
  RelayWake,       // relay host sees slot m
  RelayDecode,     // uplink slot decoded
  NodeWake,        // end-node host sees slot n
  NodeDecode,      // downlink frame decoded
  DownlinkArrive,  // downlink preamble reaches a node
  EncodeDone,
  AppOffer,
};

constexpr const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::RelayWake: return "relay_wake";
    case EventKind::RelayDecode: return "relay_decode";
    case EventKind::NodeWake: return "node_wake";
    case EventKind::NodeDecode: return "node_decode";
    case EventKind::DownlinkArrive: return "downlink_arrive";
    case EventKind::EncodeDone: return "encode_done";
    case EventKind::AppOffer: return "app_offer";
  }
  return "?";
}

struct SimEvent {
  GlobalTime time = 0;
  int node = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::NodeWake;
  std::int64_t a = 0;  // kind-specific
  std::int64_t b = 0;
};

/// Min-queue on (time, node, insertion order).
class EventQueue {
 public:
  void push(GlobalTime t, int node, EventKind kind, std::int64_t a = 0, std::int64_t b = 0) {
    heap_.push({t, node, next_seq_++, kind, a, b});
  }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const SimEvent& top() const { return heap_.top(); }

  SimEvent pop() {
    SimEvent e = heap_.top();
    heap_.pop();
    if (e.time < last_) throw SequencingError("EventQueue: time went backwards");
    last_ = e.time;
    if (tracing_) trace_.push_back(e);
    return e;
  }

  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<SimEvent>& trace() const { return trace_; }

  void write_trace_csv(std::ostream& os) const {
    os << "time_ps,node,seq,kind,a,b\n";
    for (const auto& e : trace_)
      os << e.time << ',' << e.node << ',' << e.seq << ',' << to_string(e.kind) << ',' << e.a << ',' << e.b << '\n';
  }

 private:
  struct Later {
    bool operator()(const SimEvent& x, const SimEvent& y) const {
      if (x.time != y.time) return x.time > y.time;
      if (x.node != y.node) return x.node > y.node;
      return x.seq > y.seq;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  GlobalTime last_ = INT64_MIN;
  bool tracing_ = false;
  std::vector<SimEvent> trace_;
};

}  // namespace rpnc::sim
