#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "rpnc/common.hpp"

namespace rpnc::link {

/// "oooooooo: xx xx ..." with 16 bytes per line.
inline std::string hexdump(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  char buf[16];
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    std::snprintf(buf, sizeof buf, "%08zx:", off);
    out += buf;
    for (std::size_t i = off; i < std::min(off + 16, bytes.size()); ++i) {
      std::snprintf(buf, sizeof buf, " %02x", bytes[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<std::uint8_t> parse_hexdump(const std::string& text) {
  std::vector<std::uint8_t> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError("hexdump: missing offset");
    if (std::stoul(line.substr(0, colon), nullptr, 16) != out.size())
      throw FormatError("hexdump: offset mismatch");
    std::istringstream bytes(line.substr(colon + 1));
    std::string tok;
    while (bytes >> tok) out.push_back(static_cast<std::uint8_t>(std::stoul(tok, nullptr, 16)));
  }
  return out;
}

}  // namespace rpnc::link
