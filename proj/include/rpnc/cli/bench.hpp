#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "rpnc/baseband.hpp"

namespace rpnc::cli {

/// Noiseless stream with preambles at known slot positions.
struct BenchStream {
  std::string name;
  baseband::SampleStream y;
  std::vector<baseband::FramePreamble> preambles;  // roles the receiver searches for
  std::vector<baseband::Detection> truth;
  std::int64_t slot_samples = 0;
  std::int64_t slots = 0;
  std::int64_t offset = 0;  // expected preamble start within a slot
};

namespace detail {

inline void place(baseband::SampleStream& y, const baseband::FramePreamble& pre, std::int64_t start) {
  for (std::size_t i = 0; i < pre.samples.size(); ++i) y.samples[static_cast<std::size_t>(start) + i] += pre.samples[i];
}

}  // namespace detail

/// Relay view: A and B aligned, A alone, B alone, then A with B two samples late.
inline BenchStream make_uplink_bench(const baseband::OfdmParams& p, std::uint64_t seed, std::int64_t slot_samples,
                                     std::int64_t slots, std::int64_t offset = 500) {
  using rpnc::Role;
  BenchStream b{"uplink", {}, {}, {}, slot_samples, slots, offset};
  b.preambles = {baseband::make_preamble(Role::EndNodeA, p, seed), baseband::make_preamble(Role::EndNodeB, p, seed)};
  b.y.samples.assign(static_cast<std::size_t>(slot_samples * slots), 0.0);
  for (std::int64_t s = 0; s < slots; ++s) {
    const std::int64_t o = s * slot_samples + offset;
    const int pattern = static_cast<int>(s % 4);
    if (pattern != 2) {
      detail::place(b.y, b.preambles[0], o);
      b.truth.push_back({Role::EndNodeA, o});
    }
    if (pattern != 1) {
      const std::int64_t ob = o + (pattern == 3 ? 2 : 0);
      detail::place(b.y, b.preambles[1], ob);
      b.truth.push_back({Role::EndNodeB, ob});
    }
  }
  std::sort(b.truth.begin(), b.truth.end());
  return b;
}

/// End-node view: a relay preamble in three of every four slots.
inline BenchStream make_downlink_bench(const baseband::OfdmParams& p, std::uint64_t seed, std::int64_t slot_samples,
                                       std::int64_t slots, std::int64_t offset = 500) {
  using rpnc::Role;
  BenchStream b{"downlink", {}, {}, {}, slot_samples, slots, offset};
  b.preambles = {baseband::make_preamble(Role::Relay, p, seed)};
  b.y.samples.assign(static_cast<std::size_t>(slot_samples * slots), 0.0);
  for (std::int64_t s = 0; s < slots; ++s) {
    if (s % 4 == 3) continue;
    const std::int64_t o = s * slot_samples + offset;
    detail::place(b.y, b.preambles[0], o);
    b.truth.push_back({Role::Relay, o});
  }
  return b;
}

inline std::string detections_string(const std::vector<baseband::Detection>& d) {
  std::string s;
  for (const auto& x : d) s += (s.empty() ? "" : " ") + std::string(rpnc::to_string(x.role)) + "@" + std::to_string(x.start_tick);
  return s;
}

struct AlgoCount {
  std::string algorithm;
  std::uint64_t multiplies = 0;
  double per_slot = 0.0;
  std::vector<baseband::Detection> detections;
};

struct BenchReport {
  std::string stream;
  std::int64_t n = 0;  // samples per slot
  std::int64_t c = 0;
  std::int64_t l = 0;
  std::int64_t slots = 0;
  std::size_t roles = 0;
  AlgoCount exhaustive, standard, narrow;
  bool identical = false;
  bool matches_truth = false;

  double ratio() const { return exhaustive.per_slot / narrow.per_slot; }
  double predicted_ratio() const { return static_cast<double>(n) / static_cast<double>(c + 1); }
};

inline BenchReport run_bench(const BenchStream& b, const baseband::SyncThresholds& th) {
  const auto& p = b.preambles.front().params;
  BenchReport r;
  r.stream = b.name;
  r.n = b.slot_samples;
  r.c = static_cast<std::int64_t>(p.cp_len);
  r.l = static_cast<std::int64_t>(p.sts_len);
  r.slots = b.slots;
  r.roles = b.preambles.size();
  const double slots = static_cast<double>(b.slots);

  auto ex = baseband::sync_exhaustive_cross(b.y, b.preambles, th);
  r.exhaustive = {"exhaustive", ex.cost.complex_multiplies, static_cast<double>(ex.cost.complex_multiplies) / slots,
                  ex.detections};
  auto st = baseband::sync_standard(b.y, b.preambles, th);
  r.standard = {"standard", st.cost.complex_multiplies, static_cast<double>(st.cost.complex_multiplies) / slots,
                st.detections};
  r.narrow.algorithm = "narrow";
  for (std::int64_t s = 0; s < b.slots; ++s) {
    for (const auto& pre : b.preambles) {
      const auto nr = baseband::sync_narrow(b.y, pre, s * b.slot_samples + b.offset, th);
      r.narrow.multiplies += nr.cost.complex_multiplies;
      if (nr.detection) r.narrow.detections.push_back(*nr.detection);
    }
  }
  std::sort(r.narrow.detections.begin(), r.narrow.detections.end());
  r.narrow.per_slot = static_cast<double>(r.narrow.multiplies) / slots;
  r.identical = r.exhaustive.detections == r.standard.detections && r.standard.detections == r.narrow.detections;
  r.matches_truth = r.exhaustive.detections == b.truth;
  return r;
}

}  // namespace rpnc::cli
