#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpnc/cli/bench.hpp"
#include "rpnc/cli/plot.hpp"
#include "rpnc/sim.hpp"

namespace rpnc::cli {

using sim::json;
using sim::MetricsReport;
using sim::SimConfig;

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Options {
  SimConfig base;
  std::string out_dir = "out";
  bool plot = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Labeled {
  std::string label;
  SimConfig cfg;
};

struct Outcome {
  std::vector<Check> checks;
  std::vector<std::string> files;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

/// Runs f(0..n-1) on a pool of threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<MetricsReport> run_all(const std::vector<Labeled>& runs, unsigned threads) {
  return parallel_map<MetricsReport>(runs.size(), threads, [&](std::size_t i) { return sim::run(runs[i].cfg); });
}

inline std::vector<double> abs_values(const std::vector<double>& v) {
  std::vector<double> a;
  a.reserve(v.size());
  for (double x : v) a.push_back(std::abs(x));
  return a;
}

inline Check make_check(std::string name, bool pass, std::string detail) {
  return {std::move(name), pass, std::move(detail)};
}

// ------------------------------------------------------------- sync accuracy

inline SimConfig sync_config(const SimConfig& base, int window, int tx_gap) {
  SimConfig c = base;
  c.scheme = sim::Scheme::Rpnc;
  c.fidelity = sim::Fidelity::Sample;
  c.arq.enabled = false;
  c.protocol.relay_forward = false;
  c.traffic.mode = sim::TrafficMode::Saturated;
  c.protocol.window = window;
  c.protocol.tx_gap = tx_gap;
  return c;
}

struct SyncPoint {
  std::string sweep;  // "W" or "tx_gap"
  int value = 0;
  std::vector<double> abs_delta_d;  // measured; +inf where a user went unseen
  std::uint64_t cp_violations = 0;
  std::uint64_t missed_users = 0;
  std::uint64_t sync_losses = 0;

  double p50() const { return sim::percentile(abs_delta_d, 50); }
  double p90() const { return sim::percentile(abs_delta_d, 90); }
  double le(double x) const { return sim::fraction_le(abs_delta_d, x); }
};

inline const std::vector<int>& window_sweep() {
  static const std::vector<int> v{1, 10, 100};
  return v;
}
inline const std::vector<int>& gap_sweep() {
  static const std::vector<int> v{0, 1, 5, 10};
  return v;
}

/// W sweep at tx_gap 0, then tx_gap sweep at W 10.
inline std::vector<Labeled> sync_runs(const SimConfig& base) {
  std::vector<Labeled> runs;
  for (int w : window_sweep()) runs.push_back({"W" + std::to_string(w), sync_config(base, w, 0)});
  for (int g : gap_sweep()) runs.push_back({"gap" + std::to_string(g), sync_config(base, 10, g)});
  return runs;
}

inline std::vector<SyncPoint> sync_sweep(const SimConfig& base, unsigned threads) {
  const auto runs = sync_runs(base);
  // gap0 repeats the W10 configuration.
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].label != "gap0") unique.push_back(i);
  const auto reports = parallel_map<MetricsReport>(unique.size(), threads,
                                                   [&](std::size_t k) { return sim::run(runs[unique[k]].cfg); });
  std::vector<SyncPoint> out;
  auto add = [&](const std::string& sweep, int value, const MetricsReport& m) {
    out.push_back({sweep, value, abs_values(m.delta_d_measured), m.cp_violations, m.relay_missed_users,
                   m.sync_losses});
  };
  std::size_t k = 0;
  const MetricsReport* w10 = nullptr;
  for (int w : window_sweep()) {
    add("W", w, reports[k]);
    if (w == 10) w10 = &reports[k];
    ++k;
  }
  for (int g : gap_sweep()) {
    if (g == 0) {
      add("tx_gap", g, *w10);
    } else {
      add("tx_gap", g, reports[k++]);
    }
  }
  return out;
}

inline const SyncPoint& find_point(const std::vector<SyncPoint>& pts, const std::string& sweep, int value) {
  for (const auto& p : pts)
    if (p.sweep == sweep && p.value == value) return p;
  throw ParameterError("no sync point " + sweep + "=" + std::to_string(value));
}

inline std::vector<Check> sync_checks(const std::vector<SyncPoint>& pts) {
  const auto& w1 = find_point(pts, "W", 1);
  const auto& w10 = find_point(pts, "W", 10);
  const auto& w100 = find_point(pts, "W", 100);
  const auto& g10 = find_point(pts, "tx_gap", 10);
  return {
      make_check("W=10 P(|dd|<=2) >= 0.90", w10.le(2.0) >= 0.90, "P=" + fmt(w10.le(2.0)) + " p90=" + fmt(w10.p90())),
      make_check("W=10 p90 <= W=1 and W=100", w10.p90() <= w1.p90() && w10.p90() <= w100.p90(),
                 "p90 W1=" + fmt(w1.p90()) + " W10=" + fmt(w10.p90()) + " W100=" + fmt(w100.p90())),
      make_check("tx_gap=10 P(|dd|<=2.5) >= 0.90", g10.le(2.5) >= 0.90,
                 "P=" + fmt(g10.le(2.5)) + " p90=" + fmt(g10.p90())),
  };
}

struct CpGuard {
  MetricsReport on, off;
};

/// Default configuration at sample fidelity, realignment on and off.
inline std::vector<Labeled> cp_guard_runs(const SimConfig& base) {
  SimConfig on = base;
  on.scheme = sim::Scheme::Rpnc;
  on.fidelity = sim::Fidelity::Sample;
  on.protocol.realign = true;
  SimConfig off = on;
  off.protocol.realign = false;
  return {{"realign_on", on}, {"realign_off", off}};
}

inline CpGuard cp_guard(const SimConfig& base, unsigned threads) {
  const auto r = run_all(cp_guard_runs(base), threads);
  return {r[0], r[1]};
}

inline std::vector<Check> cp_guard_checks(const CpGuard& g) {
  return {make_check("realign on: zero CP violations", g.on.cp_violations == 0 && g.on.uplink_slots_both > 0,
                     "violations=" + std::to_string(g.on.cp_violations) + " of " +
                         std::to_string(g.on.uplink_slots_both)),
          make_check("realign off: violations occur", g.off.cp_violations > 0,
                     "violations=" + std::to_string(g.off.cp_violations) + " of " +
                         std::to_string(g.off.uplink_slots_both))};
}

// ------------------------------------------------------------- framesync bench

inline std::vector<BenchReport> framesync_bench(const SimConfig& base, std::int64_t slots = 20) {
  baseband::OfdmParams p;
  p.n_subcarriers = base.phy.n_subcarriers;
  p.cp_len = base.phy.cp_len;
  p.sts_len = base.phy.sts_len;
  p.bandwidth = base.phy.bandwidth;
  p.used_half = std::min<std::size_t>(26, p.n_subcarriers / 2 - 1);
  const auto n = std::llround(base.protocol.slot_duration_s * static_cast<double>(base.phy.bandwidth));
  const baseband::SyncThresholds th{base.phy.cross_threshold, base.phy.autocorr_threshold, true};
  return {run_bench(make_downlink_bench(p, base.phy.preamble_seed, n, slots), th),
          run_bench(make_uplink_bench(p, base.phy.preamble_seed, n, slots), th)};
}

inline std::vector<Check> bench_checks(const BenchReport& r) {
  const double n = static_cast<double>(r.n), c = static_cast<double>(r.c), l = static_cast<double>(r.l);
  const double roles = static_cast<double>(r.roles);
  const double det_per_slot = static_cast<double>(r.standard.detections.size()) / static_cast<double>(r.slots);
  const std::string s = r.stream + ": ";
  return {
      make_check(s + "narrow <= (C+1)L per search", r.narrow.per_slot <= roles * (c + 1) * l,
                 fmt(r.narrow.per_slot / roles, 8) + " <= " + fmt((c + 1) * l, 8)),
      make_check(s + "standard <= 2N + det(C+1)L", r.standard.per_slot <= 2 * n + det_per_slot * (c + 1) * l,
                 fmt(r.standard.per_slot, 8) + " <= " + fmt(2 * n + det_per_slot * (c + 1) * l, 8)),
      make_check(s + "exhaustive >= 0.95 NL per search", r.exhaustive.per_slot >= 0.95 * roles * n * l,
                 fmt(r.exhaustive.per_slot / roles, 8) + " >= " + fmt(0.95 * n * l, 8)),
      make_check(s + "narrow < standard < exhaustive",
                 r.narrow.per_slot < r.standard.per_slot && r.standard.per_slot < r.exhaustive.per_slot, ""),
      make_check(s + "exhaustive/narrow ~ N/(C+1)", std::abs(r.ratio() / r.predicted_ratio() - 1.0) <= 0.10,
                 fmt(r.ratio()) + " vs " + fmt(r.predicted_ratio())),
      make_check(s + "identical detections", r.identical && r.matches_truth,
                 std::to_string(r.exhaustive.detections.size()) + " detections"),
  };
}

// ------------------------------------------------------------- throughput

inline const std::vector<double>& snr_sweep() {
  static const std::vector<double> v{6, 8, 10, 12, 14, 16, 18};
  return v;
}

inline SimConfig saturated_config(const SimConfig& base, sim::Scheme scheme, bool arq) {
  SimConfig c = base;
  c.fidelity = sim::Fidelity::Packet;
  c.scheme = scheme;
  c.arq.enabled = arq;
  c.traffic.mode = sim::TrafficMode::Saturated;
  c.traffic.bidirectional = true;
  c.protocol.relay_forward = true;
  return c;
}

/// Lossless point first, then one point per SNR; RPNC and TS, ARQ on and off.
inline std::vector<Labeled> throughput_runs(const SimConfig& base) {
  std::vector<Labeled> runs;
  auto add = [&](const std::string& point, const SimConfig& b) {
    for (auto scheme : {sim::Scheme::Rpnc, sim::Scheme::Ts})
      for (bool arq : {true, false})
        runs.push_back({point + "/" + sim::to_string(scheme) + "/" + (arq ? "arq" : "noarq"),
                        saturated_config(b, scheme, arq)});
  };
  SimConfig lossless = base;
  lossless.channel.fixed_per = 0.0;
  add("lossless", lossless);
  for (double snr : snr_sweep()) {
    SimConfig c = base;
    c.channel.fixed_per.reset();
    c.channel.snr_db = snr;
    add("snr" + fmt(snr), c);
  }
  return runs;
}

inline SimConfig stream_config(const SimConfig& base, std::int64_t count, double per, bool arq, sim::Scheme scheme) {
  SimConfig c = base;
  c.fidelity = sim::Fidelity::Packet;
  c.scheme = scheme;
  c.arq.enabled = arq;
  c.traffic.mode = sim::TrafficMode::Stream;
  c.traffic.count = count;
  c.traffic.bidirectional = true;
  c.protocol.relay_forward = true;
  c.channel.fixed_per = per;
  c.slots = std::max<std::int64_t>(base.slots, 40 * count);
  return c;
}

inline std::vector<Labeled> stall_runs(const SimConfig& base) {
  return {{"per0.3/arq", stream_config(base, 2000, 0.3, true, sim::Scheme::Rpnc)},
          {"per0.3/noarq", stream_config(base, 2000, 0.3, false, sim::Scheme::Rpnc)}};
}

inline bool exactly_once(const sim::DirectionStats& d, std::int64_t count) {
  return d.delivered == static_cast<std::uint64_t>(count) && d.duplicates == 0 && d.gaps == 0 && d.corrupt == 0;
}

inline std::vector<Check> factor_two_checks(const MetricsReport& rpnc, const MetricsReport& ts) {
  const double rab = rpnc.ab.goodput_pkts_per_slot / ts.ab.goodput_pkts_per_slot;
  const double rba = rpnc.ba.goodput_pkts_per_slot / ts.ba.goodput_pkts_per_slot;
  return {make_check("lossless RPNC/TS goodput = 2.00 +- 0.02", std::abs(rab - 2.0) <= 0.02 && std::abs(rba - 2.0) <= 0.02,
                     "A->B " + fmt(rab) + ", B->A " + fmt(rba))};
}

// ------------------------------------------------------------- ARQ comparison

inline std::vector<Labeled> arq_compare_runs(const SimConfig& base, std::int64_t count, double per) {
  return {{"arq", stream_config(base, count, per, true, sim::Scheme::Rpnc)},
          {"noarq", stream_config(base, count, per, false, sim::Scheme::Rpnc)}};
}

/// One uplink hop and one downlink hop per direction.
inline double end_to_end_success(double per) { return (1.0 - per) * (1.0 - per); }

inline std::vector<Check> arq_compare_checks(const MetricsReport& on, const MetricsReport& off, std::int64_t count,
                                             double per) {
  const double expect = end_to_end_success(per);
  const double fab = static_cast<double>(off.ab.delivered) / static_cast<double>(count);
  const double fba = static_cast<double>(off.ba.delivered) / static_cast<double>(count);
  return {make_check("ARQ on: exactly-once in-order both ways",
                     on.completed && exactly_once(on.ab, count) && exactly_once(on.ba, count),
                     "delivered " + std::to_string(on.ab.delivered) + "/" + std::to_string(on.ba.delivered) +
                         ", retransmissions " + std::to_string(on.retransmissions)),
          make_check("ARQ off: delivered fraction ~ end-to-end success +- 0.02",
                     std::abs(fab - expect) <= 0.02 && std::abs(fba - expect) <= 0.02,
                     fmt(fab) + ", " + fmt(fba) + " vs " + fmt(expect))};
}

// ------------------------------------------------------------- RTT

inline SimConfig echo_config(const SimConfig& base, sim::Scheme scheme, bool arq, double per) {
  SimConfig c = base;
  c.fidelity = sim::Fidelity::Packet;
  c.scheme = scheme;
  c.arq.enabled = arq;
  c.traffic.mode = sim::TrafficMode::Echo;
  c.protocol.relay_forward = true;
  c.channel.fixed_per = per;
  return c;
}

inline std::vector<Labeled> rtt_runs(const SimConfig& base) {
  std::vector<Labeled> runs;
  for (double per : {0.0, 0.1})
    for (auto scheme : {sim::Scheme::Rpnc, sim::Scheme::Ts})
      for (bool arq : {true, false})
        runs.push_back({"per" + fmt(per) + "/" + sim::to_string(scheme) + "/" + (arq ? "arq" : "noarq"),
                        echo_config(base, scheme, arq, per)});
  return runs;
}

inline const MetricsReport& by_label(const std::vector<Labeled>& runs, const std::vector<MetricsReport>& r,
                                     const std::string& label) {
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].label == label) return r[i];
  throw ParameterError("no run labelled " + label);
}

inline std::vector<Check> rtt_checks(const std::vector<Labeled>& runs, const std::vector<MetricsReport>& r) {
  const double ts = runs.front().cfg.protocol.slot_duration_s;
  const auto& rpnc0 = by_label(runs, r, "per0/rpnc/arq");
  const auto& ts0 = by_label(runs, r, "per0/ts/arq");
  const auto& on = by_label(runs, r, "per0.1/rpnc/arq");
  const auto& off = by_label(runs, r, "per0.1/rpnc/noarq");
  const auto& v = rpnc0.rtt_samples_s;
  const double mn = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
  return {make_check("lossless RPNC RTT >= 6 T_s", !v.empty() && mn >= 6 * ts,
                     "min " + fmt(mn) + " s over " + std::to_string(v.size())),
          make_check("median TS RTT > median RPNC RTT", sim::median(ts0.rtt_samples_s) > sim::median(v),
                     fmt(sim::median(ts0.rtt_samples_s)) + " > " + fmt(sim::median(v))),
          make_check("10% loss: ARQ-on median RTT >= ARQ-off",
                     sim::median(on.rtt_samples_s) >= sim::median(off.rtt_samples_s),
                     fmt(sim::median(on.rtt_samples_s)) + " >= " + fmt(sim::median(off.rtt_samples_s)))};
}

// ------------------------------------------------------------- stability

inline constexpr double kStabilityWeight = 0.01;

inline std::vector<Labeled> stability_runs(const SimConfig& base) {
  SimConfig lossless = saturated_config(base, sim::Scheme::Rpnc, true);
  lossless.channel.fixed_per = 0.0;
  lossless.slots = std::max<std::int64_t>(base.slots, 10'000) + 100;
  SimConfig dflt = saturated_config(base, sim::Scheme::Rpnc, true);
  dflt.slots = lossless.slots;
  return {{"lossless", lossless}, {"default", dflt}};
}

inline std::vector<Check> stability_checks(const MetricsReport& lossless, double slot_s) {
  const auto y = sim::ewma(lossless.decode_gaps_s, kStabilityWeight);
  if (y.empty()) return {make_check("smoothed gap -> T_s +- 1%", false, "no decoded packets")};
  const double last = y.back();
  const std::vector<double> tail(y.begin() + static_cast<std::ptrdiff_t>(y.size() / 2), y.end());
  const double growth = sim::trend_slope(tail) * static_cast<double>(tail.size());
  const double peak = *std::max_element(tail.begin(), tail.end());
  return {make_check("smoothed gap -> T_s +- 1%", std::abs(last / slot_s - 1.0) <= 0.01 && y.size() >= 10'000,
                     fmt(last, 6) + " s over " + std::to_string(y.size()) + " packets"),
          make_check("no monotone growth", std::abs(growth) <= 0.01 * slot_s && peak <= 1.01 * slot_s,
                     "second-half drift " + fmt(growth) + " s, peak " + fmt(peak, 6) + " s")};
}

// ------------------------------------------------------------- output

inline std::filesystem::path prepare_out(const Options& o) {
  std::filesystem::path p(o.out_dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_manifest(const Options& o, const std::string& command, const std::vector<Labeled>& runs,
                           const Outcome& out) {
  json j;
  j["command"] = command;
  j["seed"] = o.base.seed;
  j["config"] = sim::config_to_json(o.base);
  j["runs"] = json::array();
  for (const auto& r : runs) j["runs"].push_back({{"label", r.label}, {"config", sim::config_to_json(r.cfg)}});
  j["files"] = out.files;
  j["checks"] = json::array();
  for (const auto& c : out.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  std::ofstream f(prepare_out(o) / "manifest.json");
  f << j.dump(2) << '\n';
}

class CsvFile {
 public:
  CsvFile(const Options& o, Outcome& out, const std::string& name) : f_(prepare_out(o) / name) {
    f_ << std::setprecision(10);
    out.files.push_back(name);
  }
  std::ofstream& operator*() { return f_; }
  template <class T>
  std::ofstream& operator<<(const T& v) {
    f_ << v;
    return f_;
  }

 private:
  std::ofstream f_;
};

inline std::vector<std::pair<double, double>> cdf_points(const std::vector<double>& v) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : sim::empirical_cdf(v))
    if (std::isfinite(p.value)) pts.emplace_back(p.value, p.cdf);
  return pts;
}

inline void maybe_plot(const Options& o, Outcome& out, const std::string& name, const std::string& title,
                       const std::string& xl, const std::string& yl, const std::vector<Series>& s) {
  if (!o.plot) return;
  write_svg((prepare_out(o) / name).string(), title, xl, yl, s);
  out.files.push_back(name);
}

// ------------------------------------------------------------- commands

inline Outcome cmd_sync_accuracy(const Options& o) {
  Outcome out;
  const auto pts = sync_sweep(o.base, o.threads);
  const auto guard = cp_guard(o.base, o.threads);
  std::vector<Series> w_series, g_series;
  for (const auto& p : pts) {
    const std::string name = "sync_" + p.sweep + std::to_string(p.value) + ".csv";
    CsvFile f(o, out, name);
    sim::write_cdf_csv(*f, p.abs_delta_d);
    (p.sweep == "W" ? w_series : g_series).push_back({p.sweep + "=" + std::to_string(p.value), cdf_points(p.abs_delta_d)});
  }
  {
    CsvFile f(o, out, "sync_summary.csv");
    f << "sweep,value,samples,p50,p90,frac_le_2,frac_le_2_5,cp_violations,missed_users,sync_losses\n";
    for (const auto& p : pts)
      f << p.sweep << ',' << p.value << ',' << p.abs_delta_d.size() << ',' << p.p50() << ',' << p.p90() << ','
        << p.le(2.0) << ',' << p.le(2.5) << ',' << p.cp_violations << ',' << p.missed_users << ',' << p.sync_losses
        << '\n';
  }
  {
    CsvFile f(o, out, "cp_guard.csv");
    f << "realign,uplink_slots_both,cp_violations,sync_losses\n";
    for (const auto* m : {&guard.on, &guard.off})
      f << (m == &guard.on ? "on" : "off") << ',' << m->uplink_slots_both << ',' << m->cp_violations << ','
        << m->sync_losses << '\n';
  }
  maybe_plot(o, out, "sync_W.svg", "CDF of |arrival difference| over W", "|delta_d| (samples)", "CDF", w_series);
  maybe_plot(o, out, "sync_tx_gap.svg", "CDF of |arrival difference| over tx_gap", "|delta_d| (samples)", "CDF",
             g_series);
  out.checks = sync_checks(pts);
  for (auto& c : cp_guard_checks(guard)) out.checks.push_back(c);
  auto runs = sync_runs(o.base);
  for (auto& r : cp_guard_runs(o.base)) runs.push_back(r);
  write_manifest(o, "sync-accuracy", runs, out);
  return out;
}

inline Outcome cmd_framesync_bench(const Options& o) {
  Outcome out;
  const auto reports = framesync_bench(o.base);
  CsvFile f(o, out, "framesync_bench.csv");
  f << "stream,algorithm,samples_per_slot,slots,multiplies_total,multiplies_per_slot,detections,identical\n";
  for (const auto& r : reports) {
    for (const auto* a : {&r.narrow, &r.standard, &r.exhaustive})
      f << r.stream << ',' << a->algorithm << ',' << r.n << ',' << r.slots << ',' << a->multiplies << ','
        << a->per_slot << ',' << a->detections.size() << ',' << r.identical << '\n';
    for (auto& c : bench_checks(r)) out.checks.push_back(c);
  }
  write_manifest(o, "framesync-bench", {}, out);
  return out;
}

inline Outcome cmd_throughput(const Options& o) {
  Outcome out;
  const auto runs = throughput_runs(o.base);
  const auto r = run_all(runs, o.threads);
  const auto stall = stall_runs(o.base);
  const auto rs = run_all(stall, o.threads);
  {
    CsvFile f(o, out, "throughput.csv");
    f << "point,snr_db,scheme,arq,ab_pkts_per_slot,ba_pkts_per_slot,ab_bytes_per_s,ba_bytes_per_s,retransmissions\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& c = runs[i].cfg;
      const auto point = runs[i].label.substr(0, runs[i].label.find('/'));
      f << point << ',' << (c.channel.fixed_per ? std::string("") : fmt(c.channel.snr_db)) << ','
        << sim::to_string(c.scheme) << ',' << c.arq.enabled << ',' << r[i].ab.goodput_pkts_per_slot << ','
        << r[i].ba.goodput_pkts_per_slot << ',' << r[i].ab.goodput_bytes_per_s << ',' << r[i].ba.goodput_bytes_per_s
        << ',' << r[i].retransmissions << '\n';
    }
  }
  {
    CsvFile f(o, out, "stream_loss.csv");
    f << "label,arq,count,completed,completion_slot,ab_delivered,ba_delivered,ab_gaps,ba_gaps\n";
    for (std::size_t i = 0; i < stall.size(); ++i)
      f << stall[i].label << ',' << stall[i].cfg.arq.enabled << ',' << stall[i].cfg.traffic.count << ','
        << rs[i].completed << ',' << rs[i].completion_slot << ',' << rs[i].ab.delivered << ',' << rs[i].ba.delivered
        << ',' << rs[i].ab.gaps << ',' << rs[i].ba.gaps << '\n';
  }
  std::vector<Series> series;
  for (const char* scheme : {"rpnc", "ts"})
    for (const char* arq : {"arq", "noarq"}) {
      Series s{std::string(scheme) + " " + arq, {}};
      for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].label.starts_with("snr") && runs[i].label.ends_with(std::string("/") + scheme + "/" + arq))
          s.points.emplace_back(runs[i].cfg.channel.snr_db,
                                r[i].ab.goodput_bytes_per_s + r[i].ba.goodput_bytes_per_s);
      series.push_back(std::move(s));
    }
  maybe_plot(o, out, "throughput.svg", "Aggregate goodput vs SNR", "SNR (dB)", "bytes/s", series);

  out.checks = factor_two_checks(by_label(runs, r, "lossless/rpnc/noarq"), by_label(runs, r, "lossless/ts/noarq"));
  const auto& lossless = by_label(runs, r, "lossless/rpnc/noarq");
  const double ideal = static_cast<double>(o.base.traffic.payload_size) / o.base.protocol.slot_duration_s;
  out.checks.push_back(make_check("lossless RPNC goodput ~ D/T_s", std::abs(lossless.ab.goodput_bytes_per_s / ideal - 1) <= 0.01,
                                  fmt(lossless.ab.goodput_bytes_per_s) + " vs " + fmt(ideal)));
  const auto count = stall.front().cfg.traffic.count;
  out.checks.push_back(make_check("30% loss: ARQ-on stream completes",
                                  rs[0].completed && exactly_once(rs[0].ab, count) && exactly_once(rs[0].ba, count),
                                  "completion slot " + std::to_string(rs[0].completion_slot)));
  out.checks.push_back(make_check("30% loss: ARQ-off stream stalls",
                                  rs[1].ab.delivered < static_cast<std::uint64_t>(count) ||
                                      rs[1].ba.delivered < static_cast<std::uint64_t>(count),
                                  "delivered " + std::to_string(rs[1].ab.delivered) + "/" +
                                      std::to_string(rs[1].ba.delivered) + " of " + std::to_string(count)));
  auto all = runs;
  all.insert(all.end(), stall.begin(), stall.end());
  write_manifest(o, "throughput", all, out);
  return out;
}

inline constexpr std::int64_t kArqComparePayloads = 10'000;
inline constexpr double kArqComparePer = 0.2;

inline Outcome cmd_arq_compare(const Options& o) {
  Outcome out;
  const auto runs = arq_compare_runs(o.base, kArqComparePayloads, kArqComparePer);
  const auto r = run_all(runs, o.threads);
  CsvFile f(o, out, "arq_compare.csv");
  f << "arq,per,count,completed,ab_delivered,ba_delivered,ab_fraction,ba_fraction,expected_fraction,duplicates,gaps,"
       "corrupt,retransmissions,slots\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& m = r[i];
    const double n = static_cast<double>(kArqComparePayloads);
    f << runs[i].cfg.arq.enabled << ',' << kArqComparePer << ',' << kArqComparePayloads << ',' << m.completed << ','
      << m.ab.delivered << ',' << m.ba.delivered << ',' << static_cast<double>(m.ab.delivered) / n << ','
      << static_cast<double>(m.ba.delivered) / n << ',' << end_to_end_success(kArqComparePer) << ','
      << m.ab.duplicates + m.ba.duplicates << ',' << m.ab.gaps + m.ba.gaps << ',' << m.ab.corrupt + m.ba.corrupt << ','
      << m.retransmissions << ',' << m.slots << '\n';
  }
  out.checks = arq_compare_checks(r[0], r[1], kArqComparePayloads, kArqComparePer);
  write_manifest(o, "arq-compare", runs, out);
  return out;
}

inline Outcome cmd_rtt(const Options& o) {
  Outcome out;
  const auto runs = rtt_runs(o.base);
  const auto r = run_all(runs, o.threads);
  {
    CsvFile f(o, out, "rtt_summary.csv");
    f << "label,scheme,arq,per,samples,min_s,p50_s,p90_s,max_s\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& v = r[i].rtt_samples_s;
      const auto& c = runs[i].cfg;
      f << runs[i].label << ',' << sim::to_string(c.scheme) << ',' << c.arq.enabled << ',' << *c.channel.fixed_per
        << ',' << v.size() << ',' << sim::percentile(v, 0) << ',' << sim::percentile(v, 50) << ','
        << sim::percentile(v, 90) << ',' << sim::percentile(v, 100) << '\n';
    }
  }
  {
    CsvFile f(o, out, "rtt_samples.csv");
    f << "label,index,rtt_s\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (std::size_t k = 0; k < r[i].rtt_samples_s.size(); ++k)
        f << runs[i].label << ',' << k << ',' << r[i].rtt_samples_s[k] << '\n';
  }
  std::vector<Series> series;
  for (std::size_t i = 0; i < runs.size(); ++i) series.push_back({runs[i].label, cdf_points(r[i].rtt_samples_s)});
  maybe_plot(o, out, "rtt.svg", "RTT CDF", "RTT (s)", "CDF", series);
  out.checks = rtt_checks(runs, r);
  write_manifest(o, "rtt", runs, out);
  return out;
}

inline Outcome cmd_stability(const Options& o) {
  Outcome out;
  const auto runs = stability_runs(o.base);
  const auto r = run_all(runs, o.threads);
  std::vector<Series> series;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CsvFile f(o, out, "stability_" + runs[i].label + ".csv");
    f << "packet,gap_s,smoothed_gap_s\n";
    const auto y = sim::ewma(r[i].decode_gaps_s, kStabilityWeight);
    Series s{runs[i].label, {}};
    for (std::size_t k = 0; k < y.size(); ++k) {
      f << k << ',' << r[i].decode_gaps_s[k] << ',' << y[k] << '\n';
      s.points.emplace_back(static_cast<double>(k), y[k]);
    }
    series.push_back(std::move(s));
  }
  maybe_plot(o, out, "stability.svg", "Smoothed decode gap", "packet", "gap (s)", series);
  out.checks = stability_checks(r[0], o.base.protocol.slot_duration_s);
  write_manifest(o, "stability", runs, out);
  return out;
}

struct Command {
  const char* name;
  const char* help;
  Outcome (*fn)(const Options&);
};

inline const std::vector<Command>& commands() {
  static const std::vector<Command> c{
      {"sync-accuracy", "arrival-difference CDFs over W and tx_gap, CP guard", cmd_sync_accuracy},
      {"framesync-bench", "correlator operation counts for the three detectors", cmd_framesync_bench},
      {"throughput", "goodput per SNR, RPNC vs TS, ARQ on/off", cmd_throughput},
      {"arq-compare", "reliable stream under 20% loss, ARQ on/off", cmd_arq_compare},
      {"rtt", "echo RTT, RPNC vs TS, ARQ on/off", cmd_rtt},
      {"stability", "smoothed decode-gap series", cmd_stability},
  };
  return c;
}

}  // namespace rpnc::cli

namespace rpnc::cli {

/// Reads a config file or a manifest written by a previous run.
inline SimConfig load_config_or_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("command") && j.contains("config")) return sim::config_from_json(j["config"]);
  return sim::config_from_json(j);
}

}  // namespace rpnc::cli
