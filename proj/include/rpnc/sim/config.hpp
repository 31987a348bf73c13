#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rpnc/common.hpp"

namespace rpnc::sim {

using json = nlohmann::json;

enum class Scheme : std::uint8_t { Rpnc, Ts };
enum class Fidelity : std::uint8_t { Packet, Sample };
enum class TrafficMode : std::uint8_t { Saturated, Stream, Echo };

struct ProtocolConfig {
  double slot_duration_s = 0.01;
  int window = 10;
  int tx_gap = 10;
  bool realign = true;
  bool one_slot_ahead = true;
  std::size_t data_size = 1516;
  double decode_latency_slots = 0.6;  // after the end of the reception slot
  double encode_latency_s = 0.001;
  std::size_t mac_queue_target = 1;
  bool relay_forward = true;
};

struct ArqSettings {
  bool enabled = true;
  double alpha = 0.125;
  double beta = 0.25;
  double initial_rtt_slots = 4.0;
  double initial_dev_slots = 2.0;
  std::size_t initial_window = 8;
  int ack_delay_slots = 1;
};

struct PhySettings {
  std::int64_t bandwidth = 5'000'000;
  std::size_t n_subcarriers = 64;
  std::size_t cp_len = 32;
  std::size_t sts_len = 32;
  double cross_threshold = 0.5;
  double autocorr_threshold = 0.8;
  bool normalized_correlation = false;  // false: |c| / E_x, for a unit-gain front end
  std::uint64_t preamble_seed = 0x52504E43;
};

struct ClockSettings {
  double relay_ppm = 0.0;
  double a_ppm = 20.0;
  double b_ppm = -20.0;
  // Global instants of each node's first sample.
  double relay_start_s = 0.0;
  double a_start_s = 0.0001234;
  double b_start_s = 0.0004567;
  // Hardware T0 of each node's first sample.
  double relay_hw_t0_s = 1.0;
  double a_hw_t0_s = 2.0;
  double b_hw_t0_s = 3.0;
};

struct LatencySettings {
  double delta_min_s = 0.0005;
  double delta_max_s = 0.004;
  double phi_min_s = 0.0005;
  double phi_max_s = 0.004;
};

using PerTable = std::vector<std::pair<double, double>>;  // (snr_db, per)

struct ChannelSettings {
  double snr_db = 20.0;
  double snr50_db = 7.0;
  double slope_per_db = 1.5;
  double xor_shift_db = 2.0;
  std::optional<PerTable> per_table_single;
  std::optional<PerTable> per_table_xor;
  std::optional<double> fixed_per;  // every hop and mode
  std::vector<std::pair<double, double>> taps_a{{1.0, 0.0}};
  std::vector<std::pair<double, double>> taps_b{{1.0, 0.0}};
  std::vector<std::pair<double, double>> taps_down{{1.0, 0.0}};
  double propagation_delay_s = 0.0;
};

struct TrafficSettings {
  TrafficMode mode = TrafficMode::Saturated;
  std::size_t payload_size = 1000;
  std::int64_t count = 0;  // payloads per direction; 0 = unbounded
  bool bidirectional = true;
  int echo_interval_slots = 10;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::int64_t slots = 10'000;
  Scheme scheme = Scheme::Rpnc;
  Fidelity fidelity = Fidelity::Packet;
  ProtocolConfig protocol;
  ArqSettings arq;
  PhySettings phy;
  ClockSettings clocks;
  LatencySettings latency;
  ChannelSettings channel;
  TrafficSettings traffic;

  void validate() const;
};

constexpr const char* to_string(Scheme s) { return s == Scheme::Rpnc ? "rpnc" : "ts"; }
constexpr const char* to_string(Fidelity f) { return f == Fidelity::Packet ? "packet" : "sample"; }
constexpr const char* to_string(TrafficMode m) {
  return m == TrafficMode::Saturated ? "saturated" : m == TrafficMode::Stream ? "stream" : "echo";
}

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline std::vector<std::pair<double, double>> read_pairs(const json& v, const std::string& where) {
  std::vector<std::pair<double, double>> out;
  if (!v.is_array()) throw ConfigError(where + ": expected an array of pairs");
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ConfigError(where + ": expected [x, y] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

inline json pairs_json(const std::vector<std::pair<double, double>>& v) {
  json a = json::array();
  for (auto [x, y] : v) a.push_back({x, y});
  return a;
}

template <class E>
E read_enum(const json& j, const char* key, E current, const std::string& where,
            std::initializer_list<std::pair<const char*, E>> names) {
  if (!j.contains(key)) return current;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  const auto s = j.at(key).get<std::string>();
  for (auto [n, e] : names)
    if (s == n) return e;
  throw ConfigError(where + "." + key + ": unknown value '" + s + "'");
}

}  // namespace detail

inline void SimConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(slots > 0, "slots must be positive");
  need(protocol.slot_duration_s > 0, "protocol.slot_duration_s must be positive");
  need(protocol.window >= 1, "protocol.window must be >= 1");
  need(protocol.tx_gap >= 0, "protocol.tx_gap must be >= 0");
  need(protocol.data_size >= 1 && protocol.data_size <= 0x7FF, "protocol.data_size must be in [1, 2047]");
  need(protocol.decode_latency_slots >= 0 && protocol.decode_latency_slots < 1,
       "protocol.decode_latency_slots must be in [0, 1)");
  need(protocol.encode_latency_s >= 0, "protocol.encode_latency_s must be >= 0");
  need(protocol.mac_queue_target >= 1, "protocol.mac_queue_target must be >= 1");
  need(arq.alpha > 0 && arq.alpha < 1, "arq.alpha must be in (0, 1)");
  need(arq.beta > 0 && arq.beta < 1, "arq.beta must be in (0, 1)");
  need(arq.initial_window >= 1, "arq.initial_window must be >= 1");
  need(arq.ack_delay_slots >= 0, "arq.ack_delay_slots must be >= 0");
  need(phy.bandwidth > 0 && 100'000'000 % phy.bandwidth == 0, "phy.bandwidth must divide 1e8");
  need(phy.cross_threshold > 0 && phy.cross_threshold <= 1, "phy.cross_threshold must be in (0, 1]");
  need(phy.autocorr_threshold > 0 && phy.autocorr_threshold <= 1, "phy.autocorr_threshold must be in (0, 1]");
  const double slot_samples = protocol.slot_duration_s * static_cast<double>(phy.bandwidth);
  need(std::abs(slot_samples - std::round(slot_samples)) < 1e-6, "slot duration must be a whole number of samples");
  need(latency.delta_min_s >= 0 && latency.phi_min_s >= 0 && latency.delta_max_s >= latency.delta_min_s &&
           latency.phi_max_s >= latency.phi_min_s,
       "latency bounds are inconsistent");
  need(latency.delta_min_s + latency.phi_min_s < protocol.slot_duration_s,
       "latency: delta + phi must be able to stay below the slot duration");
  need(latency.delta_max_s + protocol.decode_latency_slots * protocol.slot_duration_s < protocol.slot_duration_s * 2,
       "latency.delta_max_s too large for the decode pipeline");
  if (channel.fixed_per) need(*channel.fixed_per >= 0 && *channel.fixed_per <= 1, "channel.fixed_per must be in [0, 1]");
  for (const auto* t : {&channel.per_table_single, &channel.per_table_xor}) {
    if (!*t) continue;
    need(!(*t)->empty(), "channel per table must not be empty");
    for (std::size_t i = 0; i < (*t)->size(); ++i) {
      need((**t)[i].second >= 0 && (**t)[i].second <= 1, "channel per table: PER must be in [0, 1]");
      if (i) {
        need((**t)[i].first > (**t)[i - 1].first, "channel per table: SNR must increase");
        need((**t)[i].second <= (**t)[i - 1].second, "channel per table: PER must not increase with SNR");
      }
    }
  }
  need(channel.slope_per_db > 0, "channel.slope_per_db must be positive");
  need(!channel.taps_a.empty() && !channel.taps_b.empty() && !channel.taps_down.empty(), "channel taps must not be empty");
  need(channel.propagation_delay_s >= 0, "channel.propagation_delay_s must be >= 0");
  need(traffic.payload_size >= 16 && traffic.payload_size <= protocol.data_size,
       "traffic.payload_size must be in [16, data_size]");
  need(traffic.count >= 0, "traffic.count must be >= 0");
  need(traffic.echo_interval_slots >= 1, "traffic.echo_interval_slots must be >= 1");
  if (fidelity == Fidelity::Sample) need(scheme == Scheme::Rpnc, "sample fidelity supports the rpnc scheme only");
}

inline SimConfig config_from_json(const json& j, SimConfig c = {}) {
  using detail::read;
  detail::check_keys(j, "config",
                     {"seed", "slots", "scheme", "fidelity", "protocol", "arq", "phy", "clocks", "latency", "channel",
                      "traffic"});
  read(j, "seed", c.seed, "config");
  read(j, "slots", c.slots, "config");
  c.scheme = detail::read_enum(j, "scheme", c.scheme, "config", {{"rpnc", Scheme::Rpnc}, {"ts", Scheme::Ts}});
  c.fidelity = detail::read_enum(j, "fidelity", c.fidelity, "config",
                                 {{"packet", Fidelity::Packet}, {"sample", Fidelity::Sample}});
  if (j.contains("protocol")) {
    const auto& p = j["protocol"];
    detail::check_keys(p, "protocol",
                       {"slot_duration_s", "window", "tx_gap", "realign", "one_slot_ahead", "data_size",
                        "decode_latency_slots", "encode_latency_s", "mac_queue_target", "relay_forward"});
    read(p, "slot_duration_s", c.protocol.slot_duration_s, "protocol");
    read(p, "window", c.protocol.window, "protocol");
    read(p, "tx_gap", c.protocol.tx_gap, "protocol");
    read(p, "realign", c.protocol.realign, "protocol");
    read(p, "one_slot_ahead", c.protocol.one_slot_ahead, "protocol");
    read(p, "data_size", c.protocol.data_size, "protocol");
    read(p, "decode_latency_slots", c.protocol.decode_latency_slots, "protocol");
    read(p, "encode_latency_s", c.protocol.encode_latency_s, "protocol");
    read(p, "mac_queue_target", c.protocol.mac_queue_target, "protocol");
    read(p, "relay_forward", c.protocol.relay_forward, "protocol");
  }
  if (j.contains("arq")) {
    const auto& a = j["arq"];
    detail::check_keys(a, "arq",
                       {"enabled", "alpha", "beta", "initial_rtt_slots", "initial_dev_slots", "initial_window",
                        "ack_delay_slots"});
    read(a, "enabled", c.arq.enabled, "arq");
    read(a, "alpha", c.arq.alpha, "arq");
    read(a, "beta", c.arq.beta, "arq");
    read(a, "initial_rtt_slots", c.arq.initial_rtt_slots, "arq");
    read(a, "initial_dev_slots", c.arq.initial_dev_slots, "arq");
    read(a, "initial_window", c.arq.initial_window, "arq");
    read(a, "ack_delay_slots", c.arq.ack_delay_slots, "arq");
  }
  if (j.contains("phy")) {
    const auto& p = j["phy"];
    detail::check_keys(p, "phy",
                       {"bandwidth_hz", "n_subcarriers", "cp_len", "sts_len", "cross_threshold", "autocorr_threshold",
                        "normalized_correlation", "preamble_seed"});
    read(p, "bandwidth_hz", c.phy.bandwidth, "phy");
    read(p, "n_subcarriers", c.phy.n_subcarriers, "phy");
    read(p, "cp_len", c.phy.cp_len, "phy");
    read(p, "sts_len", c.phy.sts_len, "phy");
    read(p, "cross_threshold", c.phy.cross_threshold, "phy");
    read(p, "autocorr_threshold", c.phy.autocorr_threshold, "phy");
    read(p, "normalized_correlation", c.phy.normalized_correlation, "phy");
    read(p, "preamble_seed", c.phy.preamble_seed, "phy");
  }
  if (j.contains("clocks")) {
    const auto& k = j["clocks"];
    detail::check_keys(k, "clocks",
                       {"relay_ppm", "a_ppm", "b_ppm", "relay_start_s", "a_start_s", "b_start_s", "relay_hw_t0_s",
                        "a_hw_t0_s", "b_hw_t0_s"});
    read(k, "relay_ppm", c.clocks.relay_ppm, "clocks");
    read(k, "a_ppm", c.clocks.a_ppm, "clocks");
    read(k, "b_ppm", c.clocks.b_ppm, "clocks");
    read(k, "relay_start_s", c.clocks.relay_start_s, "clocks");
    read(k, "a_start_s", c.clocks.a_start_s, "clocks");
    read(k, "b_start_s", c.clocks.b_start_s, "clocks");
    read(k, "relay_hw_t0_s", c.clocks.relay_hw_t0_s, "clocks");
    read(k, "a_hw_t0_s", c.clocks.a_hw_t0_s, "clocks");
    read(k, "b_hw_t0_s", c.clocks.b_hw_t0_s, "clocks");
  }
  if (j.contains("latency")) {
    const auto& l = j["latency"];
    detail::check_keys(l, "latency", {"delta_min_s", "delta_max_s", "phi_min_s", "phi_max_s"});
    read(l, "delta_min_s", c.latency.delta_min_s, "latency");
    read(l, "delta_max_s", c.latency.delta_max_s, "latency");
    read(l, "phi_min_s", c.latency.phi_min_s, "latency");
    read(l, "phi_max_s", c.latency.phi_max_s, "latency");
  }
  if (j.contains("channel")) {
    const auto& ch = j["channel"];
    detail::check_keys(ch, "channel",
                       {"snr_db", "snr50_db", "slope_per_db", "xor_shift_db", "per_table_single", "per_table_xor",
                        "fixed_per", "taps_a", "taps_b", "taps_down", "propagation_delay_s"});
    read(ch, "snr_db", c.channel.snr_db, "channel");
    read(ch, "snr50_db", c.channel.snr50_db, "channel");
    read(ch, "slope_per_db", c.channel.slope_per_db, "channel");
    read(ch, "xor_shift_db", c.channel.xor_shift_db, "channel");
    read(ch, "propagation_delay_s", c.channel.propagation_delay_s, "channel");
    auto opt_table = [&](const char* key, std::optional<PerTable>& out) {
      if (!ch.contains(key)) return;
      if (ch[key].is_null()) out.reset();
      else out = detail::read_pairs(ch[key], std::string("channel.") + key);
    };
    opt_table("per_table_single", c.channel.per_table_single);
    opt_table("per_table_xor", c.channel.per_table_xor);
    if (ch.contains("fixed_per")) {
      if (ch["fixed_per"].is_null()) c.channel.fixed_per.reset();
      else if (ch["fixed_per"].is_number()) c.channel.fixed_per = ch["fixed_per"].get<double>();
      else throw ConfigError("channel.fixed_per: expected a number or null");
    }
    if (ch.contains("taps_a")) c.channel.taps_a = detail::read_pairs(ch["taps_a"], "channel.taps_a");
    if (ch.contains("taps_b")) c.channel.taps_b = detail::read_pairs(ch["taps_b"], "channel.taps_b");
    if (ch.contains("taps_down")) c.channel.taps_down = detail::read_pairs(ch["taps_down"], "channel.taps_down");
  }
  if (j.contains("traffic")) {
    const auto& t = j["traffic"];
    detail::check_keys(t, "traffic", {"mode", "payload_size", "count", "bidirectional", "echo_interval_slots"});
    c.traffic.mode = detail::read_enum(
        t, "mode", c.traffic.mode, "traffic",
        {{"saturated", TrafficMode::Saturated}, {"stream", TrafficMode::Stream}, {"echo", TrafficMode::Echo}});
    read(t, "payload_size", c.traffic.payload_size, "traffic");
    read(t, "count", c.traffic.count, "traffic");
    read(t, "bidirectional", c.traffic.bidirectional, "traffic");
    read(t, "echo_interval_slots", c.traffic.echo_interval_slots, "traffic");
  }
  c.validate();
  return c;
}

inline json config_to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["slots"] = c.slots;
  j["scheme"] = to_string(c.scheme);
  j["fidelity"] = to_string(c.fidelity);
  const auto& p = c.protocol;
  j["protocol"] = {{"slot_duration_s", p.slot_duration_s},
                   {"window", p.window},
                   {"tx_gap", p.tx_gap},
                   {"realign", p.realign},
                   {"one_slot_ahead", p.one_slot_ahead},
                   {"data_size", p.data_size},
                   {"decode_latency_slots", p.decode_latency_slots},
                   {"encode_latency_s", p.encode_latency_s},
                   {"mac_queue_target", p.mac_queue_target},
                   {"relay_forward", p.relay_forward}};
  const auto& a = c.arq;
  j["arq"] = {{"enabled", a.enabled},
              {"alpha", a.alpha},
              {"beta", a.beta},
              {"initial_rtt_slots", a.initial_rtt_slots},
              {"initial_dev_slots", a.initial_dev_slots},
              {"initial_window", a.initial_window},
              {"ack_delay_slots", a.ack_delay_slots}};
  const auto& ph = c.phy;
  j["phy"] = {{"bandwidth_hz", ph.bandwidth},
              {"n_subcarriers", ph.n_subcarriers},
              {"cp_len", ph.cp_len},
              {"sts_len", ph.sts_len},
              {"cross_threshold", ph.cross_threshold},
              {"autocorr_threshold", ph.autocorr_threshold},
              {"normalized_correlation", ph.normalized_correlation},
              {"preamble_seed", ph.preamble_seed}};
  const auto& k = c.clocks;
  j["clocks"] = {{"relay_ppm", k.relay_ppm},         {"a_ppm", k.a_ppm},         {"b_ppm", k.b_ppm},
                 {"relay_start_s", k.relay_start_s}, {"a_start_s", k.a_start_s}, {"b_start_s", k.b_start_s},
                 {"relay_hw_t0_s", k.relay_hw_t0_s}, {"a_hw_t0_s", k.a_hw_t0_s}, {"b_hw_t0_s", k.b_hw_t0_s}};
  const auto& l = c.latency;
  j["latency"] = {{"delta_min_s", l.delta_min_s},
                  {"delta_max_s", l.delta_max_s},
                  {"phi_min_s", l.phi_min_s},
                  {"phi_max_s", l.phi_max_s}};
  const auto& ch = c.channel;
  j["channel"] = {{"snr_db", ch.snr_db},
                  {"snr50_db", ch.snr50_db},
                  {"slope_per_db", ch.slope_per_db},
                  {"xor_shift_db", ch.xor_shift_db},
                  {"per_table_single", ch.per_table_single ? detail::pairs_json(*ch.per_table_single) : json()},
                  {"per_table_xor", ch.per_table_xor ? detail::pairs_json(*ch.per_table_xor) : json()},
                  {"fixed_per", ch.fixed_per ? json(*ch.fixed_per) : json()},
                  {"taps_a", detail::pairs_json(ch.taps_a)},
                  {"taps_b", detail::pairs_json(ch.taps_b)},
                  {"taps_down", detail::pairs_json(ch.taps_down)},
                  {"propagation_delay_s", ch.propagation_delay_s}};
  const auto& t = c.traffic;
  j["traffic"] = {{"mode", to_string(t.mode)},
                  {"payload_size", t.payload_size},
                  {"count", t.count},
                  {"bidirectional", t.bidirectional},
                  {"echo_interval_slots", t.echo_interval_slots}};
  return j;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace rpnc::sim
