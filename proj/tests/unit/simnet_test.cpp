#include <gtest/gtest.h>

#include <random>

#include "rpnc/baseband.hpp"
#include "rpnc/sim.hpp"

using namespace rpnc;
using namespace rpnc::sim;

namespace {

SimConfig short_run(std::int64_t slots = 600) {
  SimConfig c;
  c.slots = slots;
  return c;
}

SimConfig no_drift(SimConfig c) {
  c.clocks.a_ppm = c.clocks.b_ppm = c.clocks.relay_ppm = 0.0;
  return c;
}

}  // namespace

TEST(Clock, TickRoundTrip) {
  std::mt19937_64 eng(3);
  for (double ppm : {-50.0, -20.0, 0.0, 0.5, 20.0, 50.0}) {
    HardwareClock c(to_global(0.0012345), 5'000'000, ppm, timing::HwTime::from_seconds(2.0));
    std::uniform_int_distribution<std::int64_t> tick(0, 5'000'000'000LL);
    for (int i = 0; i < 2000; ++i) {
      const auto k = tick(eng);
      const auto g = c.global_at(k);
      EXPECT_EQ(c.tick_at(g), k);
      EXPECT_EQ(c.tick_at(g - 1), k - 1);
      EXPECT_EQ(c.global_of_hw(c.hw_at(k)), g);
      EXPECT_NEAR(c.tick_position(g), static_cast<double>(k), 1e-5);
    }
  }
}

TEST(Clock, DriftRate) {
  HardwareClock fast(0, 5'000'000, 20.0, timing::HwTime{});
  HardwareClock nominal(0, 5'000'000, 0.0, timing::HwTime{});
  const GlobalTime one_s = kPsPerSecond;
  EXPECT_EQ(nominal.tick_at(one_s), 5'000'000);
  EXPECT_EQ(fast.tick_at(one_s), 5'000'100);
  // One 10 ms slot at 20 ppm drifts by one sample.
  EXPECT_EQ(fast.tick_at(to_global(0.01)) - nominal.tick_at(to_global(0.01)), 1);
  EXPECT_THROW(HardwareClock(0, 5'000'000, -1e6, timing::HwTime{}), ParameterError);
}

TEST(EventQueue, OrdersByTimeNodeThenInsertion) {
  EventQueue q;
  q.push(20, 2, EventKind::NodeWake, 1);
  q.push(10, 2, EventKind::NodeWake, 2);
  q.push(10, 0, EventKind::RelayWake, 3);
  q.push(10, 2, EventKind::NodeDecode, 4);
  q.push(20, 1, EventKind::NodeWake, 5);
  std::vector<std::int64_t> order;
  while (!q.empty()) order.push_back(q.pop().a);
  EXPECT_EQ(order, (std::vector<std::int64_t>{3, 2, 4, 5, 1}));
}

TEST(EventQueue, RejectsTimeTravel) {
  EventQueue q;
  q.push(10, 0, EventKind::RelayWake);
  q.pop();
  q.push(5, 0, EventKind::RelayWake);
  EXPECT_THROW(q.pop(), SequencingError);
}

TEST(Channel, PerModelShapes) {
  ChannelSettings ch;
  PerModel m(ch);
  double prev = 1.0;
  for (double snr = 0; snr <= 20; snr += 1) {
    const double p = m.per(PerMode::Single, snr);
    EXPECT_LE(p, prev);
    EXPECT_GE(m.per(PerMode::Xor, snr), p);
    prev = p;
  }
  EXPECT_NEAR(m.per(PerMode::Single, ch.snr50_db), 0.5, 1e-12);
  ch.per_table_single = PerTable{{0, 1.0}, {10, 0.2}, {20, 0.0}};
  PerModel t(ch);
  EXPECT_DOUBLE_EQ(t.per(PerMode::Single, 5), 0.6);
  EXPECT_DOUBLE_EQ(t.per(PerMode::Single, -3), 1.0);
  EXPECT_DOUBLE_EQ(t.per(PerMode::Single, 30), 0.0);
  ch.fixed_per = 0.25;
  EXPECT_DOUBLE_EQ(PerModel(ch).per(PerMode::Xor, 0), 0.25);
}

TEST(Channel, PacketLevelErasure) {
  std::mt19937_64 eng(5);
  for (double per : {0.0, 1.0}) {
    ChannelSettings ch;
    ch.fixed_per = per;
    PerModel m(ch);
    for (int i = 0; i < 1000; ++i) {
      auto r = packet_level_uplink(true, i % 2 == 0, m, eng);
      EXPECT_EQ(r.erased, per == 1.0);
      EXPECT_EQ(r.outcome, i % 2 == 0 ? UplinkOutcome::Xor : UplinkOutcome::A);
    }
  }
  ChannelSettings ch;
  ch.fixed_per = 0.2;
  PerModel m(ch);
  int lost = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) lost += packet_level_uplink(true, true, m, eng).erased;
  EXPECT_NEAR(lost / double(n), 0.2, 0.01);
  EXPECT_EQ(packet_level_uplink(false, false, m, eng).outcome, UplinkOutcome::None);
}

TEST(Waveform, SuperpositionIsSum) {
  baseband::OfdmParams p;
  const auto a = baseband::make_preamble(Role::EndNodeA, p);
  const auto b = baseband::make_preamble(Role::EndNodeB, p);
  std::mt19937_64 eng(1);
  auto y = superpose_uplink({&a.samples, 100.0, {rpnc::Complex(1.0)}}, {&b.samples, 100.0, {rpnc::Complex(1.0)}}, 0, 1000, 0.0, false, eng);
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    EXPECT_NEAR(std::abs(y.samples[100 + i] - (a.samples[i] + b.samples[i])), 0.0, 1e-12);
  EXPECT_EQ(y.samples[99], rpnc::Complex(0.0));
}

TEST(Waveform, ArrivalDifferenceRecovered) {
  baseband::OfdmParams p;
  const auto a = baseband::make_preamble(Role::EndNodeA, p);
  const auto b = baseband::make_preamble(Role::EndNodeB, p);
  std::mt19937_64 eng(9);
  for (double d : {2.0, -1.5, 0.5}) {
    auto y = superpose_uplink({&a.samples, 500.0, {rpnc::Complex(1.0)}}, {&b.samples, 500.0 + d, {rpnc::Complex(1.0)}}, 0, 2000, 25.0, true, eng);
    std::span<const rpnc::Complex> region(y.samples.data() + 500 + a.lts_body_offset(0), 2 * p.n_subcarriers);
    std::vector<rpnc::Complex> first(region.begin(), region.begin() + p.n_subcarriers);
    const auto ca = baseband::estimate_csi(first, a);
    const auto cb = baseband::estimate_csi(first, b);
    EXPECT_NEAR(baseband::arrival_diff(cb, ca), d, 0.1) << d;
  }
  EXPECT_TRUE(within_cp(32.0, 32));
  EXPECT_FALSE(within_cp(-32.5, 32));
}

TEST(Network, DeterministicTraces) {
  auto c = short_run(300);
  c.channel.fixed_per = 0.1;
  auto trace = [](const SimConfig& cfg) {
    Network n(cfg);
    n.enable_traces(true);
    n.run();
    return n.traces_csv();
  };
  const auto t1 = trace(c);
  EXPECT_FALSE(t1.empty());
  EXPECT_EQ(t1, trace(c));
  c.seed = 2;
  EXPECT_NE(t1, trace(c));
}

TEST(Network, RunsOnlyOnce) {
  Network n(short_run(50));
  n.run();
  EXPECT_THROW(n.run(), SequencingError);
}

TEST(Network, ZeroDriftNeverAdjusts) {
  auto c = no_drift(short_run(2000));
  c.fidelity = Fidelity::Sample;
  c.clocks.b_start_s = 0.0004566;  // on the sample grid
  const auto m = run(c);
  EXPECT_EQ(m.nonzero_adjustments, 0u);
  EXPECT_EQ(m.sync_losses, 0u);
  EXPECT_GT(m.downlink_xor, 1900u);
}

TEST(Network, TsNeverSuperposes) {
  auto c = short_run(2000);
  c.scheme = Scheme::Ts;
  const auto m = run(c);
  EXPECT_EQ(m.uplink_slots_both, 0u);
  EXPECT_LE(m.max_uplink_per_slot, 1u);
  EXPECT_EQ(m.downlink_xor, 0u);
  EXPECT_GT(m.ab.delivered, 0u);
  EXPECT_GT(m.ba.delivered, 0u);
}

TEST(Network, PipelineSteadyState) {
  auto c = short_run(2000);
  c.channel.fixed_per = 0.0;
  Network n(c);
  n.enable_traces(true);
  const auto m = n.run();
  EXPECT_EQ(m.max_uplink_per_slot, 2u);
  // After start-up every downlink slot carries an XOR packet.
  std::int64_t first_xor = -1, last = -1;
  for (const auto& r : n.mac_trace()) {
    if (r.node != "R" || r.kind != "xor") continue;
    if (first_xor < 0) {
      first_xor = r.slot;
    } else {
      EXPECT_EQ(r.slot, last + 1);
    }
    last = r.slot;
  }
  EXPECT_GE(first_xor, 0);
  EXPECT_LT(first_xor, 30);
  EXPECT_GE(m.downlink_xor, static_cast<std::uint64_t>(c.slots - 40));
  EXPECT_EQ(m.latency_floor_violations, 0u);
  EXPECT_EQ(m.late_transmissions, 0u);
}

TEST(Network, LosslessFactorTwo) {
  auto c = short_run(3000);
  c.channel.fixed_per = 0.0;
  const auto rpnc = run(c);
  c.scheme = Scheme::Ts;
  const auto ts = run(c);
  EXPECT_NEAR(rpnc.ab.goodput_pkts_per_slot / ts.ab.goodput_pkts_per_slot, 2.0, 0.03);
  EXPECT_NEAR(rpnc.ba.goodput_pkts_per_slot / ts.ba.goodput_pkts_per_slot, 2.0, 0.03);
}

// Conservation: nothing is delivered that was not offered, nothing twice, and
// with ARQ the stream completes exactly once under loss.
TEST(NetworkProperty, StreamConservation) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (double per : {0.0, 0.1, 0.2}) {
      SimConfig c;
      c.seed = seed;
      c.traffic.mode = TrafficMode::Stream;
      c.traffic.count = 200;
      c.channel.fixed_per = per;
      c.slots = 20'000;
      const auto m = run(c);
      for (const auto* d : {&m.ab, &m.ba}) {
        EXPECT_EQ(d->delivered, 200u) << seed << " " << per;
        EXPECT_EQ(d->duplicates, 0u);
        EXPECT_EQ(d->gaps, 0u);
        EXPECT_EQ(d->corrupt, 0u);
        EXPECT_LE(d->delivered, d->offered);
      }
      EXPECT_TRUE(m.completed);
    }
  }
}

TEST(NetworkProperty, NoArqNeverDuplicates) {
  SimConfig c;
  c.arq.enabled = false;
  c.traffic.mode = TrafficMode::Stream;
  c.traffic.count = 1000;
  c.channel.fixed_per = 0.2;
  c.slots = 3000;
  const auto m = run(c);
  for (const auto* d : {&m.ab, &m.ba}) {
    EXPECT_EQ(d->duplicates, 0u);
    EXPECT_EQ(d->corrupt, 0u);
    EXPECT_LT(d->delivered, 1000u);
    EXPECT_NEAR(d->delivered / 1000.0, 0.64, 0.06);
  }
}

TEST(Network, EchoRttLowerBound) {
  SimConfig c;
  c.traffic.mode = TrafficMode::Echo;
  c.channel.fixed_per = 0.0;
  c.slots = 2000;
  const auto m = run(c);
  ASSERT_GT(m.rtt_samples_s.size(), 100u);
  for (double r : m.rtt_samples_s) EXPECT_GE(r, 6 * c.protocol.slot_duration_s);
}

TEST(Config, ValidationRejectsNonsense) {
  SimConfig c;
  c.protocol.window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.channel.fixed_per = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
}
