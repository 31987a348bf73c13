#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "rpnc/timing.hpp"

using namespace rpnc;
using namespace rpnc::timing;

namespace {

constexpr HwTime ms(std::int64_t v) { return HwTime{v * 100'000}; }
constexpr HwTime kSample{20};  // 5 MHz
constexpr HwTime kSlot{1'000'000};

HwTime samples(double s) { return HwTime{static_cast<std::int64_t>(std::llround(s * 20.0))}; }

}  // namespace

TEST(SampleCounting, Examples) {
  EXPECT_EQ(sample_count_arrival(0, HwTime::from_seconds(5.0), 5'000'000), HwTime::from_seconds(5.0));
  EXPECT_EQ(sample_count_arrival(5'000'000, HwTime{}, 5'000'000), HwTime::from_seconds(1.0));
  EXPECT_EQ(sample_count_arrival(50'000, HwTime::from_seconds(2.0), 5'000'000), HwTime::from_seconds(2.01));
  EXPECT_THROW(sample_count_arrival(1, HwTime{}, 0), ParameterError);
}

TEST(SampleCounting, ReanchorKeepsTimeline) {
  SampleCounter c(HwTime::from_seconds(1.0), 5'000'000);
  const auto before = c.arrival(1'000'000);
  c.reanchor(1'000'000, before);
  EXPECT_EQ(c.arrival(1'000'000), before);
  EXPECT_EQ(c.arrival(1'050'000), before + HwTime::from_seconds(0.01));
  EXPECT_EQ(c.tick_of(before + HwTime{40}), 1'000'002);
  EXPECT_THROW(c.tick_of(before + HwTime{3}), RangeError);
}

TEST(InitBoundaries, Examples) {
  auto s = init_boundaries(ms(100), ms(10));
  EXPECT_EQ(s.boundary(3), ms(130));
  EXPECT_EQ(s.window_index(), 0);
  for (int n = 0; n < 50; ++n) EXPECT_EQ(s.boundary(n + 1) - s.boundary(n), ms(10));
  auto z = init_boundaries(HwTime{}, ms(10));
  for (int n = 0; n < 5; ++n) EXPECT_EQ(z.boundary(n), ms(10) * n);
}

TEST(RecordArrival, WindowRules) {
  SlotSchedule s(HwTime{}, kSlot, 10, kSample);
  s.record_arrival({3, s.boundary(3)});
  EXPECT_EQ(s.arrivals().size(), 1u);
  EXPECT_THROW(s.record_arrival({3, s.boundary(3)}), SequencingError);
  EXPECT_THROW(s.record_arrival({10, s.boundary(10)}), SequencingError);
  s.note_slot(9);
  s.realign(0);
  EXPECT_THROW(s.record_arrival({4, s.boundary(4)}), SequencingError);
  EXPECT_NO_THROW(s.record_arrival({10, s.boundary(10)}));
}

TEST(WindowDrift, HandEvaluated) {
  SlotSchedule s(HwTime{}, kSlot, 10, kSample);
  EXPECT_EQ(s.window_drift(), 0);
  s.record_arrival({1, s.boundary(1) + samples(1.2)});
  s.record_arrival({2, s.boundary(2) + samples(1.8)});
  s.record_arrival({3, s.boundary(3) + samples(1.5)});
  EXPECT_EQ(s.window_drift(), 1);

  SlotSchedule t(HwTime{}, kSlot, 10, kSample);
  t.record_arrival({1, t.boundary(1) + samples(0.4)});
  t.record_arrival({2, t.boundary(2) + samples(0.5)});
  EXPECT_EQ(t.window_drift(), 0);
}

TEST(WindowDrift, FloorsNegativeMeans) {
  SlotSchedule s(HwTime::from_seconds(1.0), kSlot, 10, kSample);
  s.record_arrival({1, s.boundary(1) - samples(0.5)});
  EXPECT_EQ(s.window_drift(), -1);
}

TEST(Realign, Examples) {
  SlotSchedule s(HwTime{}, kSlot, 10, kSample);
  s.note_slot(9);
  s.realign(0);
  EXPECT_EQ(s.window_index(), 1);
  EXPECT_EQ(s.boundary(15), kSlot * 15);

  s.note_slot(19);
  s.realign(1);
  EXPECT_EQ(s.boundary_at(20, 2) - s.boundary_at(20, 1), kSample);
  EXPECT_EQ(s.boundary(19), kSlot * 19);
  s.note_slot(29);
  s.realign(1);
  EXPECT_EQ(s.cumulative_adjust(), 2);
  EXPECT_TRUE(s.arrivals().empty());
}

TEST(Realign, OncePerWindow) {
  SlotSchedule s(HwTime{}, kSlot, 10, kSample);
  s.note_slot(9);
  s.realign(1);
  EXPECT_THROW(s.realign(1), SequencingError);
  s.note_slot(12);
  EXPECT_THROW(s.realign(0), SequencingError);
  EXPECT_THROW(s.note_slot(20), SequencingError);
}

TEST(Realign, AdditivityAndMonotonicity) {
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(eng() % 12);
    SlotSchedule s(HwTime{static_cast<std::int64_t>(eng() % 1'000'000)}, kSlot, w, kSample);
    std::vector<std::int64_t> deltas;
    for (int k = 0; k < 8; ++k) {
      s.note_slot(s.trigger_slot());
      deltas.push_back(static_cast<std::int64_t>(eng() % 7) - 3);
      s.realign(deltas.back());
    }
    const std::int64_t total = std::accumulate(deltas.begin(), deltas.end(), std::int64_t{0});
    for (std::int64_t n = 8 * w; n < 8 * w + 30; ++n)
      EXPECT_EQ(s.boundary(n), s.boundary_at(n, 0) + kSample * total);
    for (std::int64_t i = 0; i <= s.window_index(); ++i) {
      for (std::int64_t n = 0; n < 10 * w; ++n) {
        const std::int64_t next = n + 1;
        const bool step = next % w == 0 && next / w >= 1 && next / w <= i;
        const HwTime extra = step ? kSample * deltas[static_cast<std::size_t>(next / w - 1)] : HwTime{};
        EXPECT_EQ(s.boundary_at(next, i) - s.boundary_at(n, i), kSlot + extra);
      }
    }
  }
}

TEST(Realign, StepIsExactlyOneSlotWithinAWindowIndex) {
  SlotSchedule s(HwTime{}, kSlot, 10, kSample);
  for (int k = 0; k < 3; ++k) { s.note_slot(s.trigger_slot()); s.realign(k + 1); }
  // Under a fixed index, steps are T_s except where a later adjustment starts.
  for (std::int64_t n = 30; n < 80; ++n) EXPECT_EQ(s.boundary(n + 1) - s.boundary(n), kSlot);
}

TEST(SlotAt, InvertsBoundaries) {
  SlotSchedule s(HwTime{12345}, kSlot, 10, kSample);
  s.note_slot(9);
  s.realign(-2);
  for (std::int64_t n = 0; n < 30; ++n) {
    EXPECT_EQ(s.slot_at(s.boundary(n)), n);
    EXPECT_EQ(s.slot_at(s.boundary(n) - HwTime{1}), n - 1);
  }
}

TEST(ScheduleTx, OneSlotAheadAndArgmin) {
  SlotSchedule s(HwTime{}, ms(10), 10, kSample);
  EXPECT_EQ(schedule_tx_slot(7, {ms(2), ms(2), true}, s), 8);
  EXPECT_EQ(schedule_tx_slot(7, {ms(2), ms(2), false}, s), 8);
  EXPECT_EQ(schedule_tx_slot(7, {ms(7), ms(7), false}, s), 9);
}

TEST(ScheduleTx, ArgminAgreesWithOneSlotAheadBelowTs) {
  SlotSchedule s(HwTime{777}, ms(10), 10, kSample);
  std::mt19937_64 eng(1);
  for (int t = 0; t < 1000; ++t) {
    HwTime d{1 + static_cast<std::int64_t>(eng() % 499'999)};
    HwTime f{1 + static_cast<std::int64_t>(eng() % 499'999)};
    TxDelayBound b{d, f, false};
    ASSERT_NO_THROW(TxDelayBound({d, f, true}).validate(ms(10)));
    const std::int64_t n = static_cast<std::int64_t>(eng() % 1000);
    EXPECT_EQ(schedule_tx_slot(n, b, s), n + 1);
  }
  EXPECT_THROW(TxDelayBound({ms(6), ms(4), true}).validate(ms(10)), ParameterError);
}

TEST(SyncLoss, TenReferenceRule) {
  EXPECT_FALSE(check_sync_loss(100, 10));
  EXPECT_TRUE(check_sync_loss(101, 10));
  EXPECT_FALSE(check_sync_loss(0, 10));
  EXPECT_THROW(check_sync_loss(5, 0), ParameterError);
}

TEST(ScheduleTrace, CsvLayout) {
  ScheduleTrace tr;
  tr.add({0, HwTime::from_seconds(0.01), HwTime{1'000'020}, std::nullopt});
  tr.add({9, HwTime::from_seconds(0.1), std::nullopt, 1});
  std::ostringstream os;
  tr.write_csv(os);
  EXPECT_EQ(os.str(), "slot,boundary_s,arrival_s,adjust_samples\n0,0.01000000,0.01000020,\n9,0.10000000,,1\n");
}

// Closed loop on the schedule alone: exact arrivals from a drifting relay clock,
// one reference per slot.
TEST(Tracking, SteadyStateErrorBounded) {
  for (double ppm : {-50.0, -20.0, -5.0, 5.0, 20.0, 50.0}) {
    const double rate = 5e6 * (1.0 + ppm * 1e-6);  // node ticks per relay second
    SlotSchedule s(HwTime{}, kSlot, 10, kSample);
    double worst = 0.0;
    for (std::int64_t n = 0; n < 20'000; ++n) {
      s.note_slot(n);
      // Reference for slot n arrives at relay time n*T_s, read on the node's counter.
      const double tick = static_cast<double>(n) * 0.01 * rate;
      const HwTime arrival{static_cast<std::int64_t>(std::llround(tick)) * 20};
      if (n > 2000) worst = std::max(worst, std::abs(static_cast<double>((arrival - s.boundary(n)).units)) / 20.0);
      s.record_arrival({n, arrival});
      if (n == s.trigger_slot()) s.realign(s.window_drift());
    }
    const double drift_per_slot = std::abs(ppm) * 1e-6 * 0.01 * 5e6;
    EXPECT_LE(worst, 1.5 * 10 * drift_per_slot + 2.0) << ppm;
  }
}
