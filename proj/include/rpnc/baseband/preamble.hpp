#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "rpnc/baseband/fft.hpp"
#include "rpnc/baseband/ofdm_params.hpp"
#include "rpnc/baseband/sample_stream.hpp"

namespace rpnc::baseband {

inline constexpr std::uint64_t kDefaultPreambleSeed = 0x52504E43;

enum class FieldKind : std::uint8_t { StsA, StsB, StsRelay, Lts };

namespace detail {

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

inline Complex qpsk(std::uint64_t bits) {
  static const double h = std::numbers::sqrt2 / 2.0;
  switch (bits & 3U) {
    case 0: return {h, h};
    case 1: return {-h, h};
    case 2: return {-h, -h};
    default: return {h, -h};
  }
}

inline std::uint64_t role_salt(Role role) { return 0x100 + static_cast<std::uint64_t>(role); }

}  // namespace detail

/// Subcarriers carrying a role's LTS. A and B split the band into interleaved
/// pairs (k mod 4 in {0,1} vs {2,3}) so their LTS are orthogonal and neither is
/// periodic at lag L. The relay uses every used subcarrier.
inline bool lts_carries(Role role, std::int64_t k, const OfdmParams& p) {
  auto ak = k < 0 ? -k : k;
  if (ak < 1 || ak > static_cast<std::int64_t>(p.used_half)) return false;
  auto m = ((k % 4) + 4) % 4;
  switch (role) {
    case Role::EndNodeA: return m == 0 || m == 1;
    case Role::EndNodeB: return m == 2 || m == 3;
    case Role::Relay: return true;
  }
  return false;
}

inline std::vector<Complex> sts_sequence(Role role, const OfdmParams& p, std::uint64_t seed) {
  auto eng = detail::seeded_engine(seed, detail::role_salt(role), 1);
  std::vector<Complex> x(p.sts_len);
  for (auto& v : x) v = detail::qpsk(eng() >> 62);
  return x;
}

/// Frequency-domain LTS, scaled so the time-domain body has unit mean power.
/// The two LTS repetitions use different sequences; identical bodies would make
/// the second CP repeat the first body's tail at lag L.
inline std::vector<Complex> lts_frequency(Role role, const OfdmParams& p, std::uint64_t seed,
                                          std::size_t index = 0) {
  auto eng = detail::seeded_engine(seed, detail::role_salt(role), 2 + index);
  const auto n = p.n_subcarriers;
  std::vector<Complex> freq(n, 0.0);
  std::size_t used = 0;
  for (std::size_t bin = 0; bin < n; ++bin)
    if (lts_carries(role, subcarrier_of(bin, n), p)) ++used;
  const double scale = static_cast<double>(n) / std::sqrt(static_cast<double>(used));
  for (std::size_t bin = 0; bin < n; ++bin) {
    if (lts_carries(role, subcarrier_of(bin, n), p)) freq[bin] = scale * detail::qpsk(eng() >> 62);
  }
  return freq;
}

/// Prepends the last C samples of `body`.
inline std::vector<Complex> with_cp(const std::vector<Complex>& body, std::size_t cp_len) {
  std::vector<Complex> out(body.end() - static_cast<std::ptrdiff_t>(cp_len), body.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

/// Sign applied to the second STS copy. B uses -1 so its lag-L autocorrelation
/// has phase pi, letting the standard detector pick B's sequence directly.
inline int sts_sign(Role role) { return role == Role::EndNodeB ? -1 : 1; }

struct FramePreamble {
  Role role = Role::Relay;
  OfdmParams params;
  std::vector<Complex> sts;
  std::array<std::vector<Complex>, 2> lts_freq;
  std::vector<FieldKind> layout;
  std::vector<Complex> samples;

  /// Start of this role's own 2STS field.
  std::size_t sts_field_offset() const {
    return role == Role::EndNodeB ? params.symbol_len() : 0;
  }
  /// Tick offset at which cross-correlation against `sts` peaks first.
  std::size_t sts_match_offset() const { return sts_field_offset() + params.first_peak_offset(); }
  std::size_t lts_field_offset() const {
    return role == Role::Relay ? params.symbol_len() : 2 * params.symbol_len();
  }
  /// Start of the k-th LTS body (after its CP).
  std::size_t lts_body_offset(std::size_t k = 0) const {
    return lts_field_offset() + k * params.symbol_len() + params.cp_len;
  }
  std::size_t length() const { return samples.size(); }
};

inline std::size_t preamble_length(Role role, const OfdmParams& p) {
  return (role == Role::Relay ? 3 : 4) * p.symbol_len();
}

inline FramePreamble make_preamble(Role role, const OfdmParams& p,
                                   std::uint64_t seed = kDefaultPreambleSeed) {
  p.validate();
  FramePreamble fp;
  fp.role = role;
  fp.params = p;
  fp.sts = sts_sequence(role, p, seed);
  fp.lts_freq = {lts_frequency(role, p, seed, 0), lts_frequency(role, p, seed, 1)};

  std::vector<Complex> sts_body(fp.sts);
  for (auto v : fp.sts) sts_body.push_back(static_cast<double>(sts_sign(role)) * v);
  const auto sts_field = with_cp(sts_body, p.cp_len);
  const std::array<std::vector<Complex>, 2> lts_fields{with_cp(ifft(fp.lts_freq[0]), p.cp_len),
                                                       with_cp(ifft(fp.lts_freq[1]), p.cp_len)};
  const std::vector<Complex> silent(p.symbol_len(), 0.0);

  if (role == Role::Relay) {
    fp.layout = {FieldKind::StsRelay, FieldKind::Lts, FieldKind::Lts};
  } else {
    fp.layout = {FieldKind::StsA, FieldKind::StsB, FieldKind::Lts, FieldKind::Lts};
  }
  std::size_t lts_index = 0;
  for (auto f : fp.layout) {
    const std::vector<Complex>* src = nullptr;
    if (f == FieldKind::Lts) src = &lts_fields[lts_index++];
    if (f == FieldKind::StsRelay) src = &sts_field;
    if (f == FieldKind::StsA) src = role == Role::EndNodeA ? &sts_field : &silent;
    if (f == FieldKind::StsB) src = role == Role::EndNodeB ? &sts_field : &silent;
    fp.samples.insert(fp.samples.end(), src->begin(), src->end());
  }
  return fp;
}

inline SampleStream gen_preamble(Role role, const OfdmParams& p,
                                 std::uint64_t seed = kDefaultPreambleSeed) {
  return {make_preamble(role, p, seed).samples, 0};
}

}  // namespace rpnc::baseband
