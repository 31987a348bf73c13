#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rpnc/baseband/sample_stream.hpp"

namespace rpnc::baseband {

using Manifest = std::map<std::string, std::string>;

/// Little-endian interleaved float32 I/Q.
inline void write_cf32(const std::string& path, const SampleStream& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("golden: cannot open " + path);
  for (auto v : s.samples) {
    for (float x : {static_cast<float>(v.real()), static_cast<float>(v.imag())}) {
      auto u = std::bit_cast<std::uint32_t>(x);
      unsigned char b[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                            static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
      f.write(reinterpret_cast<const char*>(b), 4);
    }
  }
}

inline SampleStream read_cf32(const std::string& path, std::int64_t origin_tick = 0) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("golden: cannot open " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() % 8 != 0) throw FormatError("golden: truncated cf32 file " + path);
  SampleStream s;
  s.origin_tick = origin_tick;
  auto word = [&](std::size_t off) {
    std::uint32_t u = raw[off] | (raw[off + 1] << 8) | (raw[off + 2] << 16) |
                      (static_cast<std::uint32_t>(raw[off + 3]) << 24);
    return static_cast<double>(std::bit_cast<float>(u));
  };
  for (std::size_t off = 0; off < raw.size(); off += 8) s.samples.emplace_back(word(off), word(off + 4));
  return s;
}

/// `key = value` lines; '#' starts a comment.
inline void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path);
  if (!f) throw FormatError("golden: cannot open " + path);
  for (const auto& [k, v] : m) f << k << " = " << v << "\n";
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("golden: cannot open " + path);
  Manifest m;
  std::string line;
  auto trim = [](std::string s) {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(f, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return m;
}

}  // namespace rpnc::baseband
