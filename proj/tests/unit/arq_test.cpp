#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "rpnc/arq.hpp"

using namespace rpnc;
using namespace rpnc::arq;

namespace {

constexpr double kSlot = 0.01;

std::vector<std::uint8_t> bytes(int v) { return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)}; }

}  // namespace

TEST(Rtt, FixedPoint) {
  RttEstimator e{0.100, 0.0};
  auto u = update_rtt(e, 0.100);
  EXPECT_DOUBLE_EQ(u.rtt_est, 0.100);
  EXPECT_DOUBLE_EQ(u.rtt_dev, 0.0);
  EXPECT_DOUBLE_EQ(u.timeout(), 0.100);
}

TEST(Rtt, HandEvaluatedUpdate) {
  RttEstimator e{0.100, 0.0};
  auto u = update_rtt(e, 0.180);
  EXPECT_NEAR(u.rtt_est, 0.110, 1e-15);
  EXPECT_NEAR(u.rtt_dev, 0.020, 1e-15);
  EXPECT_NEAR(u.timeout(), 0.190, 1e-15);
  EXPECT_EQ(window_size(u, kSlot), 19u);
}

TEST(Rtt, RejectsNonPositiveSample) {
  EXPECT_THROW(update_rtt({0.1, 0.0}, 0.0), MeasurementError);
  EXPECT_THROW(update_rtt({0.1, 0.0}, -1.0), MeasurementError);
}

TEST(Rtt, TimeoutNeverBelowEstimate) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.001, 1.0);
  RttEstimator e{0.05, 0.0};
  for (int i = 0; i < 10'000; ++i) {
    e = update_rtt(e, u(eng));
    ASSERT_GE(e.rtt_dev, 0.0);
    ASSERT_GE(e.timeout(), e.rtt_est);
  }
}

TEST(WindowSize, CeilingArithmetic) {
  EXPECT_EQ(window_size({0.100, 0.0}, kSlot), 10u);
  EXPECT_EQ(window_size({0.101, 0.0}, kSlot), 11u);
  EXPECT_EQ(window_size({0.0, 0.0}, kSlot), 1u);
  EXPECT_THROW(window_size({0.1, 0.0}, 0.0), ParameterError);
}

TEST(Seq, WireMapping) {
  EXPECT_EQ(from_wire(to_wire(300), 290), 300);
  EXPECT_EQ(from_wire(to_wire(250), 260), 250);
  EXPECT_EQ(from_wire(0xFF, 0), -1);
}

TEST(Sender, EmitsQueuedWithinWindow) {
  ArqConfig cfg;
  cfg.initial_window = 19;
  SendWindow w(cfg, kSlot);
  for (int i = 0; i < 3; ++i) w.submit(bytes(i));
  auto out = w.on_tick(0.0);
  ASSERT_EQ(out.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)].seq, w.base() + i);
}

TEST(Sender, FullWindowEmitsNothingNew) {
  ArqConfig cfg;
  cfg.initial_window = 4;
  SendWindow w(cfg, kSlot);
  for (int i = 0; i < 10; ++i) w.submit(bytes(i));
  EXPECT_EQ(w.on_tick(0.0).size(), 4u);
  EXPECT_TRUE(w.on_tick(0.001).empty());
}

TEST(Sender, RetransmitOncePerExpiry) {
  ArqConfig cfg;
  SendWindow w(cfg, kSlot);
  w.submit(bytes(1));
  ASSERT_EQ(w.on_tick(0.0).size(), 1u);
  const double to = w.rtt().timeout();
  EXPECT_TRUE(w.on_tick(to).empty());
  auto r = w.on_tick(to + 1e-6);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_TRUE(r[0].retransmission);
  EXPECT_TRUE(w.on_tick(to + 2e-6).empty());
  EXPECT_DOUBLE_EQ(w.rto(), 2 * to);
  EXPECT_TRUE(w.on_tick(3 * to).empty());
  EXPECT_EQ(w.on_tick(3 * to + 2e-6).size(), 1u);
}

TEST(Sender, BackoffClearsOnCleanSample) {
  ArqConfig cfg;
  SendWindow w(cfg, kSlot);
  w.submit(bytes(0));
  w.submit(bytes(1));
  ASSERT_EQ(w.on_tick(0.0, 1).size(), 1u);
  const double to = w.rtt().timeout();
  ASSERT_EQ(w.on_tick(to + 1e-6, 1).size(), 1u);  // seq 0 again
  EXPECT_DOUBLE_EQ(w.backoff(), 2.0);
  ASSERT_EQ(w.on_tick(to + 2e-6, 1).size(), 1u);  // seq 1, first copy
  const link::SackBlock blk{1, 1};
  const auto r = w.on_ack(to + 0.05, to_wire(-1), std::span(&blk, 1));
  ASSERT_TRUE(r.rtt_sample.has_value());
  EXPECT_NEAR(*r.rtt_sample, 0.05 - 2e-6, 1e-9);
  EXPECT_DOUBLE_EQ(w.backoff(), 1.0);
}

TEST(Sender, AckCoveringRetransmissionGivesNoSample) {
  ArqConfig cfg;
  SendWindow w(cfg, kSlot);
  w.submit(bytes(0));
  w.submit(bytes(1));
  ASSERT_EQ(w.on_tick(0.0).size(), 2u);
  const double to = w.rtt().timeout();
  ASSERT_EQ(w.on_tick(to + 1e-6, 1).size(), 1u);  // seq 0 again; seq 1 buffered at the receiver
  const auto est = w.rtt().rtt_est;
  const auto r = w.on_ack(to + 0.05, to_wire(1), {});
  EXPECT_EQ(r.acked.size(), 2u);
  EXPECT_FALSE(r.rtt_sample.has_value());
  EXPECT_DOUBLE_EQ(w.rtt().rtt_est, est);
  EXPECT_DOUBLE_EQ(w.backoff(), 2.0);  // kept until a clean sample
}

TEST(Sender, SimultaneousExpiriesBackOffOnce) {
  ArqConfig cfg;
  SendWindow w(cfg, kSlot);
  for (int i = 0; i < 4; ++i) w.submit(bytes(i));
  ASSERT_EQ(w.on_tick(0.0).size(), 4u);
  const double to = w.rtt().timeout();
  EXPECT_EQ(w.on_tick(to + 1e-6).size(), 4u);
  EXPECT_DOUBLE_EQ(w.backoff(), 2.0);
  EXPECT_EQ(w.on_tick(3 * to + 2e-6).size(), 4u);
  EXPECT_DOUBLE_EQ(w.backoff(), 4.0);
}

TEST(Sender, CumulativeAckAdvancesBase) {
  SendWindow w({}, kSlot);
  for (int i = 0; i < 3; ++i) w.submit(bytes(i));
  w.on_tick(0.0);
  auto r = w.on_ack(0.05, to_wire(0), {});
  EXPECT_EQ(r.acked, std::vector<Seq>{0});
  EXPECT_EQ(w.base(), 1);
  ASSERT_TRUE(r.rtt_sample);
  EXPECT_DOUBLE_EQ(*r.rtt_sample, 0.05);
}

TEST(Sender, SackClearsBlocks) {
  ArqConfig cfg;
  cfg.initial_window = 19;
  SendWindow w(cfg, kSlot);
  for (int i = 0; i < 9; ++i) w.submit(bytes(i));
  w.on_tick(0.0);
  w.on_ack(0.01, to_wire(5), {});
  std::vector<link::SackBlock> sack{{7, 2}};
  auto r = w.on_ack(0.02, to_wire(5), sack);
  EXPECT_EQ(r.acked, (std::vector<Seq>{7, 8}));
  EXPECT_EQ(w.in_flight().count(6), 1u);
  EXPECT_EQ(w.in_flight().count(7), 0u);
  EXPECT_EQ(w.base(), 6);
  EXPECT_TRUE(r.fast_retransmit.empty());
}

TEST(Sender, StaleAckIgnored) {
  SendWindow w({}, kSlot);
  for (int i = 0; i < 5; ++i) w.submit(bytes(i));
  w.on_tick(0.0);
  w.on_ack(0.01, to_wire(2), {});
  const auto before = w.in_flight().size();
  auto r = w.on_ack(0.02, to_wire(0), {});
  EXPECT_TRUE(r.acked.empty());
  EXPECT_EQ(w.in_flight().size(), before);
  EXPECT_EQ(w.base(), 3);
}

TEST(Sender, KarnSkipsRetransmittedSamples) {
  SendWindow w({}, kSlot);
  w.submit(bytes(0));
  w.on_tick(0.0);
  const double t = w.rtt().timeout() + 0.001;
  w.on_tick(t);
  auto r = w.on_ack(t + 0.01, to_wire(0), {});
  EXPECT_EQ(r.acked.size(), 1u);
  EXPECT_FALSE(r.rtt_sample.has_value());
}

TEST(Sender, WindowTracksTimeoutAndCap) {
  SendWindow w({}, kSlot);
  for (int i = 0; i < 300; ++i) w.submit(bytes(i));
  w.on_tick(0.0);
  w.on_ack(5.0, to_wire(0), {});
  EXPECT_EQ(w.window_limit(), kMaxWindow);
}

TEST(Receiver, InOrder) {
  RecvBuffer r;
  for (int i = 0; i < 5; ++i) r.on_data(to_wire(i), bytes(i));
  auto res = r.on_data(to_wire(5), bytes(5));
  ASSERT_EQ(res.delivered.size(), 1u);
  EXPECT_EQ(res.delivered[0].seq, 5);
  EXPECT_EQ(res.ack_no, 5);
  EXPECT_TRUE(res.sack.empty());
}

TEST(Receiver, HandTracedSack) {
  RecvBuffer r;
  for (int i = 0; i < 5; ++i) r.on_data(to_wire(i), bytes(i));
  r.on_data(to_wire(7), bytes(7));
  r.on_data(to_wire(8), bytes(8));
  auto res = r.on_data(to_wire(5), bytes(5));
  ASSERT_EQ(res.delivered.size(), 1u);
  EXPECT_EQ(res.ack_no, 5);
  EXPECT_EQ(res.sack, (std::vector<link::SackBlock>{{7, 2}}));
  res = r.on_data(to_wire(6), bytes(6));
  ASSERT_EQ(res.delivered.size(), 3u);
  EXPECT_EQ(res.delivered[2].seq, 8);
  EXPECT_EQ(res.ack_no, 8);
  EXPECT_TRUE(res.sack.empty());
}

TEST(Receiver, AtMostFourBlocksNearestFirst) {
  RecvBuffer r;
  for (int s : {2, 4, 6, 8, 10, 12}) r.on_data(to_wire(s), bytes(s));
  auto blocks = r.sack_blocks();
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(blocks[0], (link::SackBlock{2, 1}));
  EXPECT_EQ(blocks[3], (link::SackBlock{8, 1}));
}

TEST(Receiver, DuplicateReacked) {
  RecvBuffer r;
  r.on_data(0, bytes(0));
  auto res = r.on_data(0, bytes(0));
  EXPECT_TRUE(res.duplicate);
  EXPECT_TRUE(res.delivered.empty());
  EXPECT_EQ(res.ack_no, 0);
}

TEST(Feedback, Flags) {
  RecvBuffer r;
  r.on_data(0, bytes(0));
  auto both = build_feedback(r, Seq{3});
  EXPECT_TRUE(both.seq_flag);
  EXPECT_TRUE(both.ack_flag);
  EXPECT_EQ(both.seq_no, 3);
  EXPECT_EQ(both.ack_no, 0);

  ArqConfig cfg;
  cfg.ack_delay_slots = 2;
  ArqEndpoint ep(cfg, kSlot);
  EXPECT_FALSE(ep.next_packet(0.0).has_value());
  link::LinkHeader h;
  h.seq_flag = true;
  h.seq_no = 0;
  ep.on_packet(0.0, h, bytes(0));
  EXPECT_FALSE(ep.next_packet(0.0).has_value());
  ep.on_slot();
  ep.on_slot();
  auto ack = ep.next_packet(0.02);
  ASSERT_TRUE(ack.has_value());
  EXPECT_TRUE(ack->header.ack_flag);
  EXPECT_FALSE(ack->header.seq_flag);
  EXPECT_FALSE(ep.next_packet(0.03).has_value());
}

namespace {

// Two endpoints over a lossy pipe with a fixed one-way delay in slots.
struct LossyHarness {
  ArqEndpoint a, b;
  std::mt19937_64 eng;
  double loss;
  int delay;
  std::deque<std::pair<int, LinkOut>> to_b, to_a;

  LossyHarness(const ArqConfig& cfg, double p, int d, std::uint64_t seed)
      : a(cfg, kSlot), b(cfg, kSlot), eng(seed), loss(p), delay(d) {}

  bool lost() { return std::uniform_real_distribution<double>(0, 1)(eng) < loss; }
};

}  // namespace

TEST(ArqProperty, ExactlyOnceInOrderUnderLoss) {
  for (double loss : {0.0, 0.2, 0.5}) {
    LossyHarness h({}, loss, 4, 17);
    const int n = 500;
    for (int i = 0; i < n; ++i) { h.a.submit(bytes(i)); h.b.submit(bytes(i + 10'000)); }
    std::vector<int> got_a, got_b;
    for (int slot = 0; slot < 200'000 && (got_a.size() < n || got_b.size() < n); ++slot) {
      const double now = slot * kSlot;
      h.a.on_slot();
      h.b.on_slot();
      if (auto p = h.a.next_packet(now)) h.to_b.emplace_back(slot + h.delay, *p);
      if (auto p = h.b.next_packet(now)) h.to_a.emplace_back(slot + h.delay, *p);
      auto drain = [&](std::deque<std::pair<int, LinkOut>>& q, ArqEndpoint& dst, std::vector<int>& got, int base) {
        while (!q.empty() && q.front().first <= slot) {
          auto pkt = std::move(q.front().second);
          q.pop_front();
          if (h.lost()) continue;
          for (auto& d : dst.on_packet(now, pkt.header, pkt.payload).delivered)
            got.push_back(d.payload[0] | (d.payload[1] << 8));
          (void)base;
        }
      };
      drain(h.to_b, h.b, got_b, 0);
      drain(h.to_a, h.a, got_a, 10'000);
      for (auto* ep : {&h.a, &h.b}) {
        const auto& s = ep->sender();
        ASSERT_LE(s.next_seq() - s.base(), static_cast<Seq>(std::max<std::size_t>(s.window_limit(), 127)));
      }
    }
    ASSERT_EQ(got_b.size(), static_cast<std::size_t>(n)) << loss;
    ASSERT_EQ(got_a.size(), static_cast<std::size_t>(n)) << loss;
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(got_b[static_cast<std::size_t>(i)], i);
      EXPECT_EQ(got_a[static_cast<std::size_t>(i)], i + 10'000);
    }
  }
}

TEST(ArqProperty, SackedNeverRetransmittedBeforeExpiry) {
  SendWindow w({}, kSlot);
  for (int i = 0; i < 10; ++i) w.submit(bytes(i));
  w.on_tick(0.0);
  std::vector<link::SackBlock> sack{{3, 4}};
  w.on_ack(0.01, to_wire(0), sack);
  auto r = w.on_tick(w.rtt().timeout() + 0.001);
  for (const auto& p : r) {
    EXPECT_TRUE(p.seq < 3 || p.seq > 6) << p.seq;
  }
}

TEST(ArqDisabled, DeliversWhatArrives) {
  ArqConfig cfg;
  cfg.enabled = false;
  ArqEndpoint a(cfg, kSlot), b(cfg, kSlot);
  for (int i = 0; i < 3; ++i) a.submit(bytes(i));
  int delivered = 0;
  for (int i = 0; i < 3; ++i) {
    auto p = a.next_packet(0.0);
    ASSERT_TRUE(p);
    EXPECT_FALSE(p->header.ack_flag);
    if (i == 1) continue;
    delivered += static_cast<int>(b.on_packet(0.0, p->header, p->payload).delivered.size());
  }
  EXPECT_EQ(delivered, 2);
  EXPECT_FALSE(a.next_packet(1.0).has_value());
}

TEST(ArqTrace, CsvHeader) {
  ArqTrace t;
  link::LinkHeader h;
  h.ack_flag = true;
  h.sack_blocks = {{3, 2}, {9, 1}};
  t.add({0.5, "A", "tx", h, false});
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str(), "time_s,node,dir,seq_flag,seq,ack_flag,ack,sack,retransmit\n0.5,A,tx,0,0,1,0,3:2;9:1,0\n");
}

TEST(Sender, TimerCappedAtHundredSlots) {
  SendWindow w({}, kSlot);
  w.submit(bytes(0));
  w.on_tick(0.0);
  double t = 0.0;
  for (int i = 0; i < 6; ++i) {
    t += w.rto() + 1e-6;
    ASSERT_EQ(w.on_tick(t).size(), 1u);
  }
  EXPECT_DOUBLE_EQ(w.backoff(), kMaxBackoff);
  EXPECT_LE(w.rto(), kMaxRtoSlots * kSlot);
  EXPECT_FALSE(w.on_ack(t + 2.0, to_wire(0), {}).rtt_sample.has_value());
  EXPECT_LE(w.rto(), kMaxRtoSlots * kSlot);
}
