#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpnc/arq.hpp"
#include "rpnc/baseband.hpp"
#include "rpnc/mac.hpp"
#include "rpnc/sim/channel.hpp"
#include "rpnc/sim/clock.hpp"
#include "rpnc/sim/config.hpp"
#include "rpnc/sim/event_queue.hpp"
#include "rpnc/sim/latency.hpp"
#include "rpnc/sim/metrics.hpp"
#include "rpnc/sim/traffic.hpp"
#include "rpnc/sim/waveform.hpp"

namespace rpnc::sim {

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

/// Slot-by-slot MAC log.
struct MacTraceRow {
  double time_s;
  std::string node;
  std::int64_t slot;
  std::string band;
  std::string event;
  std::string kind;
  std::size_t queue_depth;
};

inline void write_mac_trace_csv(std::ostream& os, const std::vector<MacTraceRow>& rows) {
  os << "time_s,node,slot,band,event,kind,queue_depth\n";
  for (const auto& r : rows)
    os << r.time_s << ',' << r.node << ',' << r.slot << ',' << r.band << ',' << r.event << ',' << r.kind << ','
       << r.queue_depth << '\n';
}

/// Discrete-event model of the relay network: three hardware clocks, host
/// latency, two FDD channels at packet or sample fidelity, MACs and ARQ.
class Network {
 public:
  static constexpr int kRelay = 0;
  static constexpr int kNodeA = 1;
  static constexpr int kNodeB = 2;

  explicit Network(SimConfig cfg)
      : cfg_((cfg.validate(), std::move(cfg))),
        params_{cfg_.phy.n_subcarriers, cfg_.phy.cp_len, cfg_.phy.sts_len, cfg_.phy.bandwidth, 26},
        t_s_(timing::HwTime::from_seconds(cfg_.protocol.slot_duration_s)),
        slot_samples_(std::llround(cfg_.protocol.slot_duration_s * static_cast<double>(cfg_.phy.bandwidth))),
        latency_(cfg_.latency.delta_min_s, cfg_.latency.delta_max_s, cfg_.latency.phi_min_s, cfg_.latency.phi_max_s,
                 cfg_.protocol.slot_duration_s),
        per_(cfg_.channel),
        relay_(mac::RelayConfig{cfg_.protocol.tx_gap, cfg_.scheme == Scheme::Ts, cfg_.protocol.relay_forward,
                                cfg_.protocol.data_size}),
        chan_rng_(make_rng(cfg_.seed, 10)),
        noise_rng_(make_rng(cfg_.seed, 11)),
        offer_rng_(make_rng(cfg_.seed, 12)) {
    params_.used_half = std::min<std::size_t>(26, params_.n_subcarriers / 2 - 1);
    params_.validate();
    const auto& k = cfg_.clocks;
    const auto B = cfg_.phy.bandwidth;
    clocks_.emplace_back(to_global(k.relay_start_s), B, k.relay_ppm, timing::HwTime::from_seconds(k.relay_hw_t0_s));
    clocks_.emplace_back(to_global(k.a_start_s), B, k.a_ppm, timing::HwTime::from_seconds(k.a_hw_t0_s));
    clocks_.emplace_back(to_global(k.b_start_s), B, k.b_ppm, timing::HwTime::from_seconds(k.b_hw_t0_s));
    for (int i = 0; i < 3; ++i) lat_rng_[i] = make_rng(cfg_.seed, 20 + i);

    pre_relay_ = baseband::make_preamble(Role::Relay, params_, cfg_.phy.preamble_seed);
    pre_end_[0] = baseband::make_preamble(Role::EndNodeA, params_, cfg_.phy.preamble_seed);
    pre_end_[1] = baseband::make_preamble(Role::EndNodeB, params_, cfg_.phy.preamble_seed);
    th_ = {cfg_.phy.cross_threshold, cfg_.phy.autocorr_threshold, cfg_.phy.normalized_correlation};

    arq::ArqConfig ac{cfg_.arq.enabled,          cfg_.arq.alpha,          cfg_.arq.beta,
                      cfg_.arq.initial_rtt_slots, cfg_.arq.initial_dev_slots, cfg_.arq.initial_window,
                      cfg_.arq.ack_delay_slots};
    for (int i = 0; i < 2; ++i) {
      const Role role = i == 0 ? Role::EndNodeA : Role::EndNodeB;
      mac::EndNodeConfig ec{role,
                            cfg_.protocol.window,
                            cfg_.protocol.tx_gap,
                            t_s_,
                            cfg_.phy.bandwidth,
                            cfg_.protocol.data_size,
                            cfg_.protocol.realign,
                            cfg_.scheme == Scheme::Ts};
      const bool active = cfg_.traffic.mode == TrafficMode::Echo ? i == 0 : (i == 0 || cfg_.traffic.bidirectional);
      nodes_.push_back(std::make_unique<EndNode>(EndNode{
          mac::EndNodeMac(ec, clocks_[1 + i].hw_t0()), arq::ArqEndpoint(ac, cfg_.protocol.slot_duration_s),
          TrafficGen(cfg_.traffic, cfg_.seed, static_cast<std::uint8_t>(i), active),
          StreamChecker(cfg_.seed, cfg_.traffic.payload_size), 0, {}, {}, {}, {}}));
    }
    taps_[0] = make_taps(cfg_.channel.taps_a);
    taps_[1] = make_taps(cfg_.channel.taps_b);
    taps_down_ = make_taps(cfg_.channel.taps_down);
    prop_ = to_global(cfg_.channel.propagation_delay_s);
  }

  const SimConfig& config() const { return cfg_; }

  void enable_traces(bool on) {
    tracing_ = on;
    events_.enable_trace(on);
  }

  MetricsReport run() {
    if (ran_) throw SequencingError("Network::run: already ran");
    ran_ = true;
    end_time_ = relay_boundary(cfg_.slots);
    events_.push(relay_boundary(0), kRelay, EventKind::RelayWake, 0);
    if (cfg_.traffic.mode == TrafficMode::Echo) schedule_offer(relay_boundary(0));
    while (!events_.empty() && events_.top().time < end_time_ && !finished_) {
      const auto e = events_.pop();
      now_ = e.time;
      dispatch(e);
    }
    finish();
    return m_;
  }

  const EventQueue& events() const { return events_; }
  const std::vector<MacTraceRow>& mac_trace() const { return mac_rows_; }
  const arq::ArqTrace& arq_trace() const { return arq_rows_; }
  const timing::ScheduleTrace& schedule_trace(Role r) const { return node(r).sched_trace; }
  const HardwareClock& clock(int node_id) const { return clocks_.at(node_id); }
  const mac::EndNodeMac& end_mac(Role r) const { return node(r).mac; }
  const mac::RelayMac& relay_mac() const { return relay_; }
  const arq::ArqEndpoint& arq_endpoint(Role r) const { return node(r).arq; }

  std::string traces_csv() const {
    std::ostringstream os;
    events_.write_trace_csv(os);
    write_mac_trace_csv(os, mac_rows_);
    arq_rows_.write_csv(os);
    for (const auto& n : nodes_) n->sched_trace.write_csv(os);
    return os.str();
  }

 private:
  struct EndNode {
    mac::EndNodeMac mac;
    arq::ArqEndpoint arq;
    TrafficGen gen;
    StreamChecker checker;  // data arriving at this node
    std::uint64_t epoch = 0;
    struct Heard {
      std::size_t frame;
      GlobalTime time;
      double pos;  // tick position in this node's clock
    };
    std::deque<Heard> heard;
    std::optional<std::size_t> acquiring;
    std::optional<GlobalTime> last_data_decode;
    timing::ScheduleTrace sched_trace;
  };

  struct DownFrame {
    std::int64_t slot;
    mac::FrameKind kind;
    std::vector<std::uint8_t> image;
    std::array<bool, 2> erased{};
    GlobalTime uplink_start = -1;  // start of the uplink slot that fed it
  };

  struct UpTx {
    std::vector<std::uint8_t> image;
    double pos;  // relay tick position of the frame start
  };

  struct UpSlot {
    std::array<std::optional<UpTx>, 2> tx;
  };

  EndNode& node(Role r) { return *nodes_[r == Role::EndNodeA ? 0 : 1]; }
  const EndNode& node(Role r) const { return *nodes_[r == Role::EndNodeA ? 0 : 1]; }
  static std::string node_name(int i) { return i == 0 ? "A" : "B"; }

  GlobalTime relay_boundary(std::int64_t m) const { return clocks_[kRelay].global_at(m * slot_samples_); }
  GlobalTime slots_to_ps(double s) const { return to_global(s * cfg_.protocol.slot_duration_s); }
  GlobalTime decode_delay() const { return slots_to_ps(1.0 + cfg_.protocol.decode_latency_slots); }
  double now_s() const { return to_seconds(now_); }

  void dispatch(const SimEvent& e) {
    switch (e.kind) {
      case EventKind::RelayWake: relay_wake(e.a); break;
      case EventKind::RelayDecode: relay_decode(e.a); break;
      case EventKind::DownlinkArrive: downlink_arrive(e.node - 1, static_cast<std::size_t>(e.a)); break;
      case EventKind::NodeDecode: node_decode(e.node - 1, static_cast<std::size_t>(e.a)); break;
      case EventKind::NodeWake:
        if (static_cast<std::uint64_t>(e.b) == nodes_[e.node - 1]->epoch) node_wake(e.node - 1, e.a);
        break;
      case EventKind::EncodeDone: nodes_[e.node - 1]->mac.on_encode_done(); break;
      case EventKind::AppOffer: app_offer(); break;
    }
  }

  // ---------------------------------------------------------------- relay

  void relay_wake(std::int64_t m) {
    auto d = relay_.on_slot(m);
    if (d.kind) {
      DownFrame f{d.slot, *d.kind, std::move(d.image), {}, -1};
      if (*d.kind != mac::FrameKind::Beacon && !relay_queue_src_.empty()) {
        f.uplink_start = relay_queue_src_.front();
        relay_queue_src_.pop_front();
      }
      switch (*d.kind) {
        case mac::FrameKind::Xor: ++m_.downlink_xor; break;
        case mac::FrameKind::Single: ++m_.downlink_single; break;
        case mac::FrameKind::Beacon: ++m_.downlink_beacon; break;
      }
      for (int i = 0; i < 2; ++i) f.erased[i] = downlink_erased(per_, chan_rng_);
      const GlobalTime g = relay_boundary(d.slot);
      frames_.push_back(std::move(f));
      for (int i = 0; i < 2; ++i)
        events_.push(g + prop_, 1 + i, EventKind::DownlinkArrive, static_cast<std::int64_t>(frames_.size() - 1));
      if (tracing_)
        mac_rows_.push_back({to_seconds(g), "R", d.slot, "down", "tx", mac::to_string(*d.kind),
                             relay_.forward_queue_size()});
    }
    const double delta = latency_.sample(lat_rng_[kRelay]).delta;
    events_.push(relay_boundary(m + 1) + to_global(delta), kRelay, EventKind::RelayWake, m + 1);
  }

  void relay_decode(std::int64_t k) {
    auto it = uplink_.find(k);
    if (it == uplink_.end()) return;
    UpSlot u = std::move(it->second);
    uplink_.erase(it);
    const bool tx_a = u.tx[0].has_value(), tx_b = u.tx[1].has_value();
    const double expected = static_cast<double>(k * slot_samples_);
    const double half = static_cast<double>(cfg_.phy.cp_len / 2);

    std::array<bool, 2> seen{};
    if (cfg_.fidelity == Fidelity::Packet) {
      for (int i = 0; i < 2; ++i) seen[i] = u.tx[i] && std::abs(std::round(u.tx[i]->pos) - expected) <= half;
    } else {
      seen = relay_identify_sample_level(k, u);
    }
    for (int i = 0; i < 2; ++i) {
      if (u.tx[i] && !seen[i]) ++m_.relay_missed_users;
      if (!u.tx[i] && seen[i]) ++m_.relay_false_alarms;  // decodes to garbage; nothing passes the CRC
      seen[i] = seen[i] && u.tx[i];
    }

    bool cp_ok = true;
    if (tx_a && tx_b) {
      ++m_.uplink_slots_both;
      const double d = u.tx[0]->pos - u.tx[1]->pos;
      m_.delta_d_true.push_back(d);
      cp_ok = within_cp(d, cfg_.phy.cp_len);
      if (!cp_ok) ++m_.cp_violations;
      if (cfg_.fidelity == Fidelity::Sample) m_.delta_d_measured.push_back(last_measured_);
    } else if (tx_a || tx_b) {
      ++m_.uplink_slots_single;
    }

    const auto res = packet_level_uplink(seen[0], seen[1], per_, chan_rng_);
    mac::UplinkReception rx;
    switch (res.outcome) {
      case UplinkOutcome::None: break;
      case UplinkOutcome::A: rx = {mac::UplinkKind::A, u.tx[0]->image}; break;
      case UplinkOutcome::B: rx = {mac::UplinkKind::B, u.tx[1]->image}; break;
      case UplinkOutcome::Xor: rx = {mac::UplinkKind::Both, link::superimpose(u.tx[0]->image, u.tx[1]->image)}; break;
    }
    if (rx.kind != mac::UplinkKind::None && (res.erased || (rx.kind == mac::UplinkKind::Both && !cp_ok)))
      rx.image[link::kHeaderSize] ^= 0x01;  // decoding failure: the CRC will reject it
    const auto r = relay_.on_uplink(rx);
    if (rx.kind != mac::UplinkKind::None && cfg_.protocol.relay_forward && !r.crc_ok && !r.collision)
      ++m_.relay_crc_fail;
    if (r.collision) ++m_.relay_collisions;
    if (r.enqueued) relay_queue_src_.push_back(relay_boundary(k));
    if (tracing_)
      mac_rows_.push_back({now_s(), "R", k, "up", r.enqueued ? "rx" : "rx_fail", mac::to_string(rx.kind),
                           relay_.forward_queue_size()});
  }

  /// Renders the relay's uplink window for slot k, identifies users with the
  /// narrow search and, when both are present, estimates their arrival
  /// difference from the LTS phase slopes.
  std::array<bool, 2> relay_identify_sample_level(std::int64_t k, const UpSlot& u) {
    const std::int64_t expected = k * slot_samples_;
    const auto C = static_cast<std::int64_t>(cfg_.phy.cp_len);
    const std::int64_t pad = 2 * C + baseband::kInterpHalfWidth;
    const std::int64_t origin = expected - pad;
    const auto len = static_cast<std::size_t>(pre_end_[0].length() + 2 * pad);
    std::vector<Arrival> arr;
    for (int i = 0; i < 2; ++i)
      if (u.tx[i]) arr.push_back({&pre_end_[i].samples, u.tx[i]->pos, taps_[i]});
    const auto y = render_window(origin, len, std::span<const Arrival>(arr), cfg_.channel.snr_db, true, noise_rng_);

    std::array<bool, 2> seen{};
    std::array<std::int64_t, 2> det{};
    for (int i = 0; i < 2; ++i) {
      const auto r = baseband::sync_narrow(y, pre_end_[i], expected, th_);
      if (r.detection) {
        seen[i] = true;
        det[i] = r.detection->start_tick;
      }
    }
    last_measured_ = std::numeric_limits<double>::infinity();
    if (seen[0] && seen[1]) {
      std::array<double, 2> start{};
      for (int i = 0; i < 2; ++i) {
        const auto& pre = pre_end_[i];
        const std::size_t n = params_.n_subcarriers;
        baseband::Csi avg;
        for (std::size_t r = 0; r < 2; ++r) {
          const std::int64_t cut = det[i] + static_cast<std::int64_t>(pre.lts_body_offset(r)) - C / 2;
          const auto region = y.view(cut, n);
          auto csi = baseband::estimate_csi(region, pre, r);
          if (r == 0) {
            avg = std::move(csi);
          } else {
            for (std::size_t b = 0; b < n; ++b) avg.gains[b] = 0.5 * (avg.gains[b] + csi.gains[b]);
          }
        }
        try {
          start[i] = static_cast<double>(det[i] - C / 2) + baseband::phase_slope_offset(avg);
        } catch (const EstimationError&) {
          return seen;
        }
      }
      last_measured_ = start[0] - start[1];
    }
    return seen;
  }

  // ---------------------------------------------------------------- end nodes

  void downlink_arrive(int i, std::size_t fi) {
    auto& nd = *nodes_[i];
    const auto& f = frames_[fi];
    const double pos = clocks_[1 + i].tick_position(now_);
    nd.heard.push_back({fi, now_, pos});
    while (!nd.heard.empty() && nd.heard.front().time < now_ - slots_to_ps(4.0)) nd.heard.pop_front();

    if (nd.mac.rx_state() == mac::RxState::Init && !nd.acquiring) {
      if (cfg_.scheme == Scheme::Ts && f.kind != mac::FrameKind::Beacon) return;
      if (auto tick = init_detect(i, pos)) {
        nd.acquiring = fi;
        acquire_tick_[i] = *tick;
      }
    }
    events_.push(now_ + decode_delay(), 1 + i, EventKind::NodeDecode, static_cast<std::int64_t>(fi));
  }

  /// INIT search. Outside frames the stream holds noise only, so the standard
  /// detector runs over a window around the frame.
  std::optional<std::int64_t> init_detect(int i, double pos) {
    if (cfg_.fidelity == Fidelity::Packet) return std::llround(pos);
    const auto sym = static_cast<std::int64_t>(params_.symbol_len());
    const std::int64_t origin = static_cast<std::int64_t>(std::floor(pos)) - 4 * sym;
    const auto len = static_cast<std::size_t>(pre_relay_.length() + 8 * sym);
    const Arrival a{&pre_relay_.samples, pos, taps_down_};
    const auto y = render_window(origin, len, std::span<const Arrival>(&a, 1), cfg_.channel.snr_db, true, noise_rng_);
    const auto r = baseband::sync_standard(y, {pre_relay_}, th_);
    if (r.detections.empty()) return std::nullopt;
    (void)i;
    return r.detections.front().start_tick;
  }

  void node_decode(int i, std::size_t fi) {
    auto& nd = *nodes_[i];
    if (nd.acquiring && *nd.acquiring == fi) {
      nd.acquiring.reset();
      acquire(i, acquire_tick_[i]);
    }
    if (nd.mac.rx_state() != mac::RxState::Sync) return;
    const auto& f = frames_[fi];
    if (f.erased[i]) {  // preamble found, payload fails its CRC
      if (tracing_) mac_rows_.push_back({now_s(), node_name(i), f.slot, "down", "rx_fail", "erased", nd.mac.queue_depth()});
      return;
    }
    const auto res = nd.mac.on_downlink(f.image);
    nd.mac.rx_que_pkt().clear();
    if (tracing_)
      mac_rows_.push_back({now_s(), node_name(i), f.slot, "down", res.crc_ok ? "rx" : "rx_fail",
                           link::to_string(res.kind), nd.mac.queue_depth()});
    if (!res.packet) return;
    const auto& pkt = *res.packet;
    if (tracing_) arq_rows_.add({now_s(), node_name(i), "rx", pkt.header, false});
    if (pkt.header.seq_flag && i == 1) {
      if (nd.last_data_decode) m_.decode_gaps_s.push_back(to_seconds(now_ - *nd.last_data_decode));
      nd.last_data_decode = now_;
    }
    if (pkt.header.seq_flag && f.uplink_start >= 0 && now_ - f.uplink_start < slots_to_ps(2.0))
      ++m_.latency_floor_violations;
    auto in = nd.arq.on_packet(now_s(), pkt.header, pkt.payload);
    for (auto& d : in.delivered) deliver(i, std::move(d.payload));
    check_completion();
  }

  /// Pings leave A at random times so they land on arbitrary slot phases.
  void schedule_offer(GlobalTime from) {
    std::uniform_real_distribution<double> u(0.5, 1.5);
    events_.push(from + slots_to_ps(cfg_.traffic.echo_interval_slots * u(offer_rng_)), 1, EventKind::AppOffer);
  }

  void app_offer() {
    auto& a = *nodes_[0];
    if (a.mac.rx_state() == mac::RxState::Sync) a.arq.submit(a.gen.ping(static_cast<std::uint64_t>(now_)));
    schedule_offer(now_);
  }

  void deliver(int i, std::vector<std::uint8_t> payload) {
    auto& nd = *nodes_[i];
    const auto info = parse_payload(payload);
    nd.checker.on_delivery(payload);
    if (!info) return;
    if (info->kind == kKindPing && i == 1) {
      nodes_[1]->arq.submit(nodes_[1]->gen.echo(*info));
    } else if (info->kind == kKindEcho && i == 0) {
      m_.rtt_samples_s.push_back(to_seconds(now_ - static_cast<GlobalTime>(info->stamp)));
    }
  }

  void acquire(int i, std::int64_t tick) {
    auto& nd = *nodes_[i];
    nd.mac.acquire(tick);
    ++nd.epoch;
    const auto& clk = clocks_[1 + i];
    std::int64_t n = 0;
    while (clk.global_of_hw(nd.mac.schedule()->boundary(n)) <= now_) {
      slot_bookkeeping(i, n);
      if (nd.mac.rx_state() != mac::RxState::Sync) return;
      ++n;
    }
    schedule_wake(i, n);
  }

  void schedule_wake(int i, std::int64_t n) {
    auto& nd = *nodes_[i];
    const auto g = clocks_[1 + i].global_of_hw(nd.mac.schedule()->boundary(n));
    pending_lat_[i] = latency_.sample(lat_rng_[1 + i]);
    events_.push(g + to_global(pending_lat_[i].delta), 1 + i, EventKind::NodeWake, n,
                 static_cast<std::int64_t>(nd.epoch));
  }

  /// Narrow reference search at slot n and the schedule update it drives.
  /// Returns false on sync loss.
  bool slot_bookkeeping(int i, std::int64_t n) {
    auto& nd = *nodes_[i];
    const std::int64_t expected = nd.mac.boundary_tick(n);
    std::optional<std::int64_t> ref;
    if (n == 0) {
      ref = expected;
    } else if (cfg_.fidelity == Fidelity::Packet) {
      const double half = static_cast<double>(cfg_.phy.cp_len / 2);
      for (const auto& h : nd.heard) {
        const auto t = std::llround(h.pos);
        if (std::abs(static_cast<double>(t - expected)) <= half) {
          ref = t;
          break;
        }
      }
      m_.narrow_multiplies += (cfg_.phy.cp_len + 1) * cfg_.phy.sts_len;
    } else {
      const auto [lo, hi] = baseband::narrow_span(pre_relay_, expected);
      std::vector<Arrival> arr;
      const double span = static_cast<double>(pre_relay_.length() + baseband::kInterpHalfWidth);
      for (const auto& h : nd.heard)
        if (h.pos < static_cast<double>(hi) + span && h.pos + span > static_cast<double>(lo))
          arr.push_back({&pre_relay_.samples, h.pos, taps_down_});
      const auto y = render_window(lo, static_cast<std::size_t>(hi - lo), std::span<const Arrival>(arr),
                                   cfg_.channel.snr_db, true, noise_rng_);
      const auto r = baseband::sync_narrow(y, pre_relay_, expected, th_);
      m_.narrow_multiplies += r.cost.complex_multiplies;
      if (r.detection) ref = r.detection->start_tick;
    }
    ++m_.narrow_searches;
    const auto boundary = nd.mac.schedule()->boundary(n);
    const auto out = nd.mac.on_slot_boundary(n, ref);
    if (out.window_delta && *out.window_delta != 0 && cfg_.protocol.realign) ++m_.nonzero_adjustments;
    if (tracing_) {
      std::optional<timing::HwTime> at;
      if (ref) at = nd.mac.counter().arrival(*ref);
      nd.sched_trace.add({n, boundary, at, out.window_delta});
    }
    if (out.sync_lost) {
      ++m_.sync_losses;
      ++nd.epoch;
      return false;
    }
    return true;
  }

  void node_wake(int i, std::int64_t n) {
    auto& nd = *nodes_[i];
    const auto lat = pending_lat_[i];
    if (!slot_bookkeeping(i, n)) return;
    auto& mac = nd.mac;

    std::optional<std::int64_t> target;
    if (!cfg_.protocol.one_slot_ahead) {
      const timing::TxDelayBound bound{timing::HwTime::from_seconds(latency_.delta_bound()),
                                       timing::HwTime::from_seconds(latency_.phi_bound()), false};
      target = timing::schedule_tx_slot(n, bound, *mac.schedule());
    }
    if (auto tx = mac.on_slot_detect(n, target)) {
      const GlobalTime g = clocks_[1 + i].global_of_hw(mac.schedule()->boundary(tx->slot));
      if (now_ + to_global(lat.phi) >= g) {
        ++m_.late_transmissions;
      } else {
        const double pos = clocks_[kRelay].tick_position(g + prop_);
        const auto k = std::llround(pos / static_cast<double>(slot_samples_));
        auto& slot = uplink_[k];
        if (!slot.tx[i]) {
          if (slot.tx[1 - i]) m_.max_uplink_per_slot = 2;
          else m_.max_uplink_per_slot = std::max<std::uint64_t>(m_.max_uplink_per_slot, 1);
          slot.tx[i] = UpTx{std::move(tx->image), pos};
          events_.push(relay_boundary(k + 1) + slots_to_ps(cfg_.protocol.decode_latency_slots), kRelay,
                       EventKind::RelayDecode, k);
        }
        if (tracing_) mac_rows_.push_back({to_seconds(g), node_name(i), tx->slot, "up", "tx", "data", mac.queue_depth()});
      }
    }

    nd.arq.on_slot();
    while (mac.queue_depth() < cfg_.protocol.mac_queue_target) {
      if (nd.arq.queued() == 0)
        if (auto p = nd.gen.offer()) nd.arq.submit(std::move(*p));
      auto out = nd.arq.next_packet(now_s());
      if (!out) break;
      if (out->retransmission) ++m_.retransmissions;
      if (!out->header.seq_flag) ++m_.ack_only_packets;
      if (tracing_) arq_rows_.add({now_s(), node_name(i), "tx", out->header, out->retransmission});
      mac.enqueue_packet(out->header, out->payload);
      events_.push(now_ + to_global(cfg_.protocol.encode_latency_s), 1 + i, EventKind::EncodeDone);
    }
    check_completion();
    schedule_wake(i, n + 1);
  }

  bool direction_done(int src) const {
    const auto& s = *nodes_[src];
    const auto& d = *nodes_[1 - src];
    if (!s.gen.exhausted()) return false;
    if (cfg_.arq.enabled) return d.checker.next_index() >= s.gen.offered();
    return s.arq.queued() == 0 && s.mac.queue_depth() == 0;
  }

  void check_completion() {
    if (cfg_.traffic.mode != TrafficMode::Stream || cfg_.traffic.count == 0 || completion_time_) return;
    if (direction_done(0) && direction_done(1)) {
      completion_time_ = now_;
      m_.completed = true;
      m_.completion_slot = clocks_[kRelay].tick_at(now_) / slot_samples_;
      // Drain what is still in the pipeline without ARQ.
      end_time_ = std::min(end_time_, now_ + (cfg_.arq.enabled ? 0 : slots_to_ps(8.0)));
      if (cfg_.arq.enabled) finished_ = true;
    }
  }

  void finish() {
    const GlobalTime stop = finished_ ? now_ : end_time_;
    const double slots = static_cast<double>(clocks_[kRelay].tick_at(stop)) / static_cast<double>(slot_samples_);
    m_.slots = static_cast<std::int64_t>(std::floor(slots));
    m_.duration_s = to_seconds(stop - relay_boundary(0));
    for (int src = 0; src < 2; ++src) {
      auto& st = src == 0 ? m_.ab : m_.ba;
      const auto& s = *nodes_[src];
      const auto& d = *nodes_[1 - src];
      st.offered = s.gen.offered();
      st.delivered = d.checker.delivered();
      st.corrupt = d.checker.corrupt();
      st.duplicates = d.checker.duplicates();
      st.gaps = d.checker.gaps();
      st.in_flight_end = st.offered >= st.delivered ? st.offered - st.delivered : 0;
      st.goodput_pkts_per_slot = static_cast<double>(st.delivered) / static_cast<double>(cfg_.slots);
      st.goodput_bytes_per_s = static_cast<double>(st.delivered * cfg_.traffic.payload_size) /
                               (static_cast<double>(cfg_.slots) * cfg_.protocol.slot_duration_s);
    }
    for (const auto& n : nodes_) m_.acquisitions += n->mac.acquisitions();
  }

  SimConfig cfg_;
  baseband::OfdmParams params_;
  timing::HwTime t_s_;
  std::int64_t slot_samples_;
  LatencyModel latency_;
  PerModel per_;
  mac::RelayMac relay_;
  std::vector<HardwareClock> clocks_;
  std::array<std::mt19937_64, 3> lat_rng_;
  std::mt19937_64 chan_rng_;
  std::mt19937_64 noise_rng_;
  std::mt19937_64 offer_rng_;
  std::vector<std::unique_ptr<EndNode>> nodes_;
  baseband::FramePreamble pre_relay_;
  std::array<baseband::FramePreamble, 2> pre_end_;
  baseband::SyncThresholds th_;
  std::array<std::vector<Complex>, 2> taps_;
  std::vector<Complex> taps_down_;
  GlobalTime prop_ = 0;

  EventQueue events_;
  GlobalTime now_ = 0;
  GlobalTime end_time_ = 0;
  bool ran_ = false;
  bool finished_ = false;
  std::optional<GlobalTime> completion_time_;
  std::vector<DownFrame> frames_;
  std::map<std::int64_t, UpSlot> uplink_;
  std::deque<GlobalTime> relay_queue_src_;
  std::array<std::int64_t, 2> acquire_tick_{};
  std::array<HostLatency, 2> pending_lat_{};
  double last_measured_ = 0.0;

  bool tracing_ = false;
  std::vector<MacTraceRow> mac_rows_;
  arq::ArqTrace arq_rows_;
  MetricsReport m_;
};

/// Runs one configuration.
inline MetricsReport run(const SimConfig& cfg) { return Network(cfg).run(); }

}  // namespace rpnc::sim
