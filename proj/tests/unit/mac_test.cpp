#include <gtest/gtest.h>

#include <map>
#include <random>

#include "rpnc/baseband.hpp"
#include "rpnc/mac.hpp"

using namespace rpnc;
using namespace rpnc::mac;

namespace {

constexpr std::int64_t kSlotTicks = 50'000;

EndNodeConfig node_cfg(Role r, int tx_gap = 10) {
  EndNodeConfig c;
  c.role = r;
  c.tx_gap = tx_gap;
  return c;
}

std::vector<std::uint8_t> payload(std::uint8_t tag, std::size_t n = 40) {
  std::vector<std::uint8_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint8_t>(tag + i);
  return p;
}

link::LinkHeader data_header(std::uint8_t seq) {
  link::LinkHeader h;
  h.seq_flag = true;
  h.seq_no = seq;
  return h;
}

/// Pushes one data packet through encode and returns the uplink image for slot n+1.
UplinkTx send_one(EndNodeMac& m, std::int64_t n, std::uint8_t tag) {
  m.enqueue_packet(data_header(tag), payload(tag));
  m.on_encode_done();
  auto tx = m.on_slot_detect(n);
  EXPECT_TRUE(tx.has_value());
  return *tx;
}

}  // namespace

TEST(EndNode, StartsInInitAndDoesNotTransmit) {
  EndNodeMac m(node_cfg(Role::EndNodeA), timing::HwTime{});
  EXPECT_EQ(m.rx_state(), RxState::Init);
  m.enqueue_packet(data_header(1), payload(1));
  m.on_encode_done();
  EXPECT_FALSE(m.on_slot_detect(5).has_value());
  EXPECT_THROW(m.on_slot_boundary(0, std::nullopt), SequencingError);
}

TEST(EndNode, AcquireSetsBoundariesFromReference) {
  EndNodeMac m(node_cfg(Role::EndNodeB), timing::HwTime{});
  m.acquire(12'345);
  EXPECT_EQ(m.rx_state(), RxState::Sync);
  for (std::int64_t n = 0; n < 20; ++n) EXPECT_EQ(m.boundary_tick(n), 12'345 + n * kSlotTicks);
}

TEST(EndNode, OneSlotAhead) {
  EndNodeMac m(node_cfg(Role::EndNodeA), timing::HwTime{});
  m.acquire(0);
  EXPECT_FALSE(m.on_slot_detect(5).has_value());  // nothing encoded: slot skipped
  m.enqueue_packet(data_header(3), payload(3));
  EXPECT_FALSE(m.on_slot_detect(5).has_value());  // still in tx_que_pkt
  m.on_encode_done();
  auto tx = m.on_slot_detect(5);
  ASSERT_TRUE(tx.has_value());
  EXPECT_EQ(tx->slot, 6);
  EXPECT_EQ(m.queue_depth(), 0u);
  EXPECT_THROW(m.on_slot_detect(5, 5), SequencingError);
}

TEST(EndNode, SlotIdsAreNonzeroAndCycle) {
  EndNodeMac m(node_cfg(Role::EndNodeA), timing::HwTime{});
  m.acquire(0);
  for (int k = 0; k < 600; ++k) {
    auto tx = send_one(m, k, static_cast<std::uint8_t>(k));
    EXPECT_EQ(tx.image[0], k % 255 + 1);
    EXPECT_EQ(tx.image[1], 0);
  }
}

TEST(EndNode, SyncLossAfterTenGaps) {
  EndNodeMac m(node_cfg(Role::EndNodeA, 10), timing::HwTime{});
  m.acquire(0);
  EXPECT_FALSE(m.on_slot_boundary(0, 0).sync_lost);
  for (std::int64_t n = 1; n <= 100; ++n) EXPECT_FALSE(m.on_slot_boundary(n, std::nullopt).sync_lost) << n;
  EXPECT_EQ(m.rx_state(), RxState::Sync);
  EXPECT_TRUE(m.on_slot_boundary(101, std::nullopt).sync_lost);
  EXPECT_EQ(m.rx_state(), RxState::Init);
  EXPECT_EQ(m.sync_losses(), 1u);
}

TEST(EndNode, ReferenceResetsGapCounter) {
  EndNodeMac m(node_cfg(Role::EndNodeA, 10), timing::HwTime{});
  m.acquire(0);
  m.on_slot_boundary(0, 0);
  for (std::int64_t n = 1; n < 400; ++n) {
    const bool ref = n % 50 == 0;
    const auto out = m.on_slot_boundary(n, ref ? std::optional(m.boundary_tick(n)) : std::nullopt);
    EXPECT_FALSE(out.sync_lost);
    EXPECT_EQ(out.reference, ref);
  }
  EXPECT_EQ(m.slots_since_ref(), 49);
}

TEST(EndNode, DriftingReferencesRealignAtTrigger) {
  EndNodeMac m(node_cfg(Role::EndNodeA), timing::HwTime{});
  m.acquire(0);
  // The reference arrives 3 samples late in every slot of the first window.
  for (std::int64_t n = 0; n < 10; ++n) {
    const auto out = m.on_slot_boundary(n, n * kSlotTicks + 3);
    if (n == 9) {
      ASSERT_TRUE(out.window_delta.has_value());
      EXPECT_EQ(*out.window_delta, 3);
    } else {
      EXPECT_FALSE(out.window_delta.has_value());
    }
  }
  EXPECT_EQ(m.boundary_tick(10), 10 * kSlotTicks + 3);
  EXPECT_EQ(m.boundary_tick(9), 9 * kSlotTicks);
}

TEST(EndNode, XorExtractionDeliversOtherPayload) {
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  const auto ta = send_one(a, 4, 11);
  const auto tb = send_one(b, 4, 77);
  const auto x = link::superimpose(ta.image, tb.image);

  auto ra = a.on_downlink(x);
  EXPECT_EQ(ra.kind, link::DownlinkKind::XorPacket);
  ASSERT_TRUE(ra.packet.has_value());
  EXPECT_EQ(ra.packet->payload, payload(77));
  EXPECT_EQ(ra.packet->header.seq_no, 77);
  EXPECT_EQ(a.rx_que_pkt().size(), 1u);

  auto rb = b.on_downlink(x);
  ASSERT_TRUE(rb.packet.has_value());
  EXPECT_EQ(rb.packet->payload, payload(11));
}

TEST(EndNode, SingleUserClassification) {
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  const auto ta = send_one(a, 0, 5);

  auto echo = a.on_downlink(ta.image);
  EXPECT_EQ(echo.kind, link::DownlinkKind::SelfEcho);
  EXPECT_FALSE(echo.packet.has_value());

  auto other = b.on_downlink(ta.image);
  EXPECT_EQ(other.kind, link::DownlinkKind::FromOther);
  ASSERT_TRUE(other.packet.has_value());
  EXPECT_EQ(other.packet->payload, payload(5));

  auto beacon = b.on_downlink(link::beacon_image());
  EXPECT_EQ(beacon.kind, link::DownlinkKind::Beacon);
  EXPECT_FALSE(beacon.packet.has_value());
  EXPECT_THROW(b.on_downlink(std::vector<std::uint8_t>(10)), FormatError);
}

TEST(EndNode, CorruptedPacketLeavesNoTrace) {
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  auto img = send_one(a, 0, 9).image;
  img[40] ^= 0x10;
  auto r = b.on_downlink(img);
  EXPECT_FALSE(r.crc_ok);
  EXPECT_FALSE(r.packet.has_value());
  EXPECT_TRUE(b.rx_que_pkt().empty());
}

TEST(EndNode, XorWithoutOwnCopyIsReported) {
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  EndNodeMac other_a(node_cfg(Role::EndNodeA), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  other_a.acquire(0);
  const auto x = link::superimpose(send_one(other_a, 0, 1).image, send_one(b, 0, 2).image);
  auto r = a.on_downlink(x);
  EXPECT_TRUE(r.own_missing);
  EXPECT_FALSE(r.packet.has_value());
}

TEST(EndNode, TsModeSlotParity) {
  auto ca = node_cfg(Role::EndNodeA);
  auto cb = node_cfg(Role::EndNodeB);
  ca.ts_mode = cb.ts_mode = true;
  EndNodeMac a(ca, timing::HwTime{});
  EndNodeMac b(cb, timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  for (auto* m : {&a, &b}) {
    m->enqueue_packet(data_header(1), payload(1));
    m->on_encode_done();
  }
  EXPECT_FALSE(a.on_slot_detect(0).has_value());
  EXPECT_TRUE(b.on_slot_detect(0).has_value());
  auto ta = a.on_slot_detect(1);
  ASSERT_TRUE(ta.has_value());
  EXPECT_EQ(ta->slot % 2, 0);
}

TEST(EndNode, FlowchartAcquiresThenTracks) {
  baseband::OfdmParams p;
  const auto relay = baseband::make_preamble(Role::Relay, p);
  baseband::SampleStream y;
  y.samples.assign(3 * kSlotTicks, 0.0);
  for (std::int64_t s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < relay.samples.size(); ++i)
      y.samples[static_cast<std::size_t>(s * kSlotTicks + 700) + i] = relay.samples[i];

  EndNodeMac m(node_cfg(Role::EndNodeA), timing::HwTime{});
  baseband::SampleStream first{{y.samples.begin(), y.samples.begin() + kSlotTicks}, 0};
  auto r0 = m.rx_flowchart_step(first, relay, 0);
  EXPECT_EQ(r0.state_before, RxState::Init);
  ASSERT_TRUE(r0.detection.has_value());
  EXPECT_EQ(r0.detection->start_tick, 700);
  EXPECT_EQ(m.rx_state(), RxState::Sync);

  auto r1 = m.rx_flowchart_step(y, relay, 1);
  EXPECT_EQ(r1.state_before, RxState::Sync);
  ASSERT_TRUE(r1.detection.has_value());
  EXPECT_EQ(r1.detection->start_tick, kSlotTicks + 700);
  EXPECT_LE(r1.cost.complex_multiplies, (p.cp_len + 1) * p.sts_len);
  ASSERT_TRUE(r1.outcome.has_value());
  EXPECT_TRUE(r1.outcome->reference);
}

TEST(Relay, XorForwardedNextSlot) {
  RelayMac r({});
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  const auto x = link::superimpose(send_one(a, 0, 1).image, send_one(b, 0, 2).image);
  r.on_slot(4);  // start-up beacon
  auto rx = r.on_uplink({UplinkKind::Both, x});
  EXPECT_TRUE(rx.crc_ok);
  EXPECT_TRUE(rx.enqueued);
  auto d = r.on_slot(5);
  EXPECT_EQ(d.slot, 6);
  ASSERT_TRUE(d.kind.has_value());
  EXPECT_EQ(*d.kind, FrameKind::Xor);
  EXPECT_EQ(d.image, x);
}

TEST(Relay, CrcFailureDroppedSilently) {
  RelayMac r({});
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  a.acquire(0);
  auto img = send_one(a, 0, 1).image;
  img[20] ^= 1;
  auto rx = r.on_uplink({UplinkKind::A, img});
  EXPECT_FALSE(rx.crc_ok);
  EXPECT_FALSE(rx.enqueued);
  EXPECT_EQ(r.forward_queue_size(), 0u);
  EXPECT_FALSE(r.on_uplink({UplinkKind::None, {}}).enqueued);
}

TEST(Relay, TsModeRejectsCollisions) {
  RelayConfig c;
  c.ts_mode = true;
  RelayMac r(c);
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  auto rx = r.on_uplink({UplinkKind::Both, link::superimpose(send_one(a, 0, 1).image, send_one(b, 0, 2).image)});
  EXPECT_TRUE(rx.collision);
  EXPECT_FALSE(rx.enqueued);
}

TEST(Relay, IdleRelayBeaconsEveryTxGap) {
  for (int gap : {1, 3, 10}) {
    RelayConfig c;
    c.tx_gap = gap;
    RelayMac r(c);
    std::int64_t last = -1;
    for (std::int64_t m = 0; m < 200; ++m) {
      auto d = r.on_slot(m);
      if (!d.kind) continue;
      EXPECT_EQ(*d.kind, FrameKind::Beacon);
      EXPECT_EQ(d.image, link::beacon_image());
      if (last >= 0) {
        EXPECT_EQ(d.slot - last, gap);
      }
      last = d.slot;
    }
    EXPECT_GE(last, 190);
  }
}

TEST(Relay, ForwardDisabledEmitsBeaconsOnly) {
  RelayConfig c;
  c.forward = false;
  RelayMac r(c);
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  a.acquire(0);
  EXPECT_FALSE(r.on_uplink({UplinkKind::A, send_one(a, 0, 1).image}).enqueued);
  EXPECT_EQ(r.forward_queue_size(), 0u);
}

// Random uplink traffic: every accepted packet goes out exactly once, in
// order, and the downlink is never silent for more than tx_gap slots.
TEST(RelayProperty, ForwardOnceAndBoundedSilence) {
  std::mt19937_64 eng(17);
  EndNodeMac a(node_cfg(Role::EndNodeA), timing::HwTime{});
  EndNodeMac b(node_cfg(Role::EndNodeB), timing::HwTime{});
  a.acquire(0);
  b.acquire(0);
  for (int gap : {1, 4, 10}) {
    RelayConfig c;
    c.tx_gap = gap;
    RelayMac r(c);
    std::vector<std::vector<std::uint8_t>> accepted, emitted;
    std::int64_t last = 0;
    std::bernoulli_distribution busy(0.2), corrupt(0.1);
    for (std::int64_t m = 0; m < 3000; ++m) {
      if (busy(eng)) {
        const bool ua = eng() % 2, ub = eng() % 2;
        UplinkReception rx;
        if (ua && ub) {
          rx = {UplinkKind::Both, link::superimpose(send_one(a, m, 1).image, send_one(b, m, 2).image)};
        } else if (ua || ub) {
          rx = {ua ? UplinkKind::A : UplinkKind::B, send_one(ua ? a : b, m, static_cast<std::uint8_t>(m)).image};
        }
        if (rx.kind != UplinkKind::None && corrupt(eng)) rx.image[30] ^= 4;
        if (r.on_uplink(rx).enqueued) accepted.push_back(rx.image);
      }
      auto d = r.on_slot(m);
      if (d.kind) {
        if (*d.kind != FrameKind::Beacon) emitted.push_back(d.image);
        if (m > 0) {
          EXPECT_LE(d.slot - last, gap);
        }
        last = d.slot;
      }
    }
    while (r.forward_queue_size() > 0) emitted.push_back(r.on_slot(0).image);
    EXPECT_EQ(emitted, accepted) << "tx_gap " << gap;
  }
}
