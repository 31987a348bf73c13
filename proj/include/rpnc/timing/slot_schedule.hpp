#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpnc/timing/hw_time.hpp"

namespace rpnc::timing {

struct ArrivalRecord {
  std::int64_t slot_index = 0;  // j
  HwTime arrival_time;          // T_j
};

struct TxDelayBound {
  HwTime delta_bound;  // RX path
  HwTime phi_bound;    // TX path
  bool one_slot_ahead = true;

  void validate(HwTime slot_duration) const {
    if (one_slot_ahead && delta_bound + phi_bound >= slot_duration)
      throw ParameterError("TxDelayBound: delta + phi must be below the slot duration");
  }
};

/// Slot boundaries S_n[i] of one node.
///
/// Window i collects reference arrivals of slots [iW, (i+1)W-1]. When the RX
/// path reaches slot (i+1)W-1 the mean offset, floored to whole samples, shifts
/// every boundary from slot (i+1)W onward.
class SlotSchedule {
 public:
  SlotSchedule(HwTime first_ref_arrival, HwTime slot_duration, int window, HwTime sample_period)
      : t_(first_ref_arrival), slot_(slot_duration), window_(window), period_(sample_period) {
    if (slot_.units <= 0) throw ParameterError("SlotSchedule: slot duration must be positive");
    if (window_ < 1) throw ParameterError("SlotSchedule: window must be >= 1");
    if (period_.units <= 0) throw ParameterError("SlotSchedule: sample period must be positive");
    prefix_.push_back(0);
  }

  HwTime t0() const { return t_; }
  HwTime slot_duration() const { return slot_; }
  HwTime sample_period() const { return period_; }
  int window() const { return window_; }
  std::int64_t window_index() const { return static_cast<std::int64_t>(prefix_.size()) - 1; }
  std::int64_t cumulative_adjust() const { return prefix_.back(); }
  std::int64_t window_first_slot() const { return window_index() * window_; }
  std::int64_t trigger_slot() const { return (window_index() + 1) * window_ - 1; }
  std::optional<std::int64_t> current_slot() const { return current_; }
  const std::vector<ArrivalRecord>& arrivals() const { return arrivals_; }

  /// Delta_k for k = 1..i.
  std::vector<std::int64_t> adjustments() const {
    std::vector<std::int64_t> d;
    for (std::size_t k = 1; k < prefix_.size(); ++k) d.push_back(prefix_[k] - prefix_[k - 1]);
    return d;
  }

  /// S_n[i] under the current window index.
  HwTime boundary(std::int64_t n) const { return boundary_at(n, window_index()); }

  /// S_n[k] for a past or current window index k.
  HwTime boundary_at(std::int64_t n, std::int64_t k) const {
    if (k < 0 || k > window_index()) throw RangeError("SlotSchedule: window index out of range");
    std::int64_t applied = n < 0 ? 0 : std::min<std::int64_t>(n / window_, k);
    return t_ + slot_ * n + period_ * prefix_[static_cast<std::size_t>(applied)];
  }

  /// Largest n with S_n <= t.
  std::int64_t slot_at(HwTime t) const {
    std::int64_t n = floor_div((t - t_).units, slot_.units);
    while (boundary(n) > t) --n;
    while (boundary(n + 1) <= t) ++n;
    return n;
  }

  /// The RX path has reached the start of slot n.
  void note_slot(std::int64_t n) {
    if (current_ && n < *current_) throw SequencingError("SlotSchedule: slot index went backwards");
    if (n > trigger_slot()) throw SequencingError("SlotSchedule: window end passed without realignment");
    current_ = n;
  }

  void record_arrival(const ArrivalRecord& rec) {
    if (rec.slot_index < window_first_slot() || rec.slot_index > trigger_slot())
      throw SequencingError("record_arrival: slot outside the current window");
    for (const auto& a : arrivals_)
      if (a.slot_index == rec.slot_index) throw SequencingError("record_arrival: duplicate slot");
    if (rec.arrival_time < t_) throw SequencingError("record_arrival: arrival precedes T");
    arrivals_.push_back(rec);
  }

  /// floor(mean(T_j - S_j)) in whole samples; 0 for an empty window.
  std::int64_t window_drift() const {
    if (arrivals_.empty()) return 0;
    std::int64_t sum = 0;
    for (const auto& a : arrivals_) sum += (a.arrival_time - boundary(a.slot_index)).units;
    return floor_div(sum, static_cast<std::int64_t>(arrivals_.size()) * period_.units);
  }

  /// Applies Delta to slots from the next window onward.
  void realign(std::int64_t delta_samples) {
    if (!current_ || *current_ != trigger_slot())
      throw SequencingError("realign: only allowed once, at the window's last slot");
    if (std::abs(delta_samples * period_.units) >= slot_.units)
      throw RangeError("realign: adjustment exceeds one slot");
    prefix_.push_back(prefix_.back() + delta_samples);
    arrivals_.clear();
  }

 private:
  HwTime t_;
  HwTime slot_;
  int window_;
  HwTime period_;
  std::vector<std::int64_t> prefix_;
  std::vector<ArrivalRecord> arrivals_;
  std::optional<std::int64_t> current_;
};

inline SlotSchedule init_boundaries(HwTime first_ref_arrival, HwTime t_s, int window = 10,
                                    HwTime sample_period = HwTime{20}) {
  return SlotSchedule(first_ref_arrival, t_s, window, sample_period);
}

/// Target uplink slot for a detection of slot n.
inline std::int64_t schedule_tx_slot(std::int64_t current_slot, const TxDelayBound& bounds,
                                     const SlotSchedule& sched) {
  if (bounds.one_slot_ahead) return current_slot + 1;
  const HwTime target = sched.boundary(current_slot) + bounds.delta_bound + bounds.phi_bound;
  std::int64_t k = current_slot;
  while (sched.boundary(k) < target) ++k;
  return k;
}

/// True once more than ten reference intervals passed without a reference.
inline bool check_sync_loss(std::int64_t slots_since_last_ref, std::int64_t tx_gap) {
  if (tx_gap < 1) throw ParameterError("check_sync_loss: tx_gap must be >= 1");
  return slots_since_last_ref > 10 * tx_gap;
}

/// Exact decimal seconds for a hardware time.
inline std::string format_seconds(HwTime t) {
  const bool neg = t.units < 0;
  const std::int64_t u = neg ? -t.units : t.units;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%08lld", neg ? "-" : "", static_cast<long long>(u / HwTime::kUnitsPerSecond),
                static_cast<long long>(u % HwTime::kUnitsPerSecond));
  return buf;
}

/// Per-slot schedule log.
class ScheduleTrace {
 public:
  struct Row {
    std::int64_t slot;
    HwTime boundary;
    std::optional<HwTime> arrival;
    std::optional<std::int64_t> adjust;
  };

  void add(Row r) { rows_.push_back(r); }
  const std::vector<Row>& rows() const { return rows_; }

  void write_csv(std::ostream& os) const {
    os << "slot,boundary_s,arrival_s,adjust_samples\n";
    for (const auto& r : rows_) {
      os << r.slot << ',' << format_seconds(r.boundary) << ',';
      if (r.arrival) os << format_seconds(*r.arrival);
      os << ',';
      if (r.adjust) os << *r.adjust;
      os << '\n';
    }
  }

 private:
  std::vector<Row> rows_;
};

}  // namespace rpnc::timing
