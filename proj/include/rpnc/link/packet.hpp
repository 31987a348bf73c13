#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "rpnc/common.hpp"
#include "rpnc/link/crc32.hpp"

namespace rpnc::link {

inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kDefaultDataSize = 1516;
inline constexpr std::size_t kCrcSize = 4;
inline constexpr std::size_t kMaxDataLen = 0x7FF;
inline constexpr std::size_t kMaxSackBlocks = 4;

inline constexpr std::uint8_t kFlagSeq = 0x80;
inline constexpr std::uint8_t kFlagAck = 0x40;
inline constexpr std::uint8_t kSackCountShift = 4;

inline constexpr std::size_t packet_size(std::size_t data_size = kDefaultDataSize) {
  return kHeaderSize + data_size + kCrcSize;
}

struct SackBlock {
  std::uint8_t start_seq = 0;
  std::uint8_t length = 1;

  bool operator==(const SackBlock&) const = default;
};

struct LinkHeader {
  std::uint8_t slot_id_a = 0;
  std::uint8_t slot_id_b = 0;
  std::uint16_t data_len = 0;
  bool seq_flag = false;
  bool ack_flag = false;
  std::uint8_t seq_no = 0;
  std::uint8_t ack_no = 0;
  std::vector<SackBlock> sack_blocks;

  bool operator==(const LinkHeader&) const = default;
};

enum class DownlinkKind : std::uint8_t { XorPacket, FromOther, SelfEcho, Beacon };

constexpr const char* to_string(DownlinkKind k) {
  switch (k) {
    case DownlinkKind::XorPacket: return "xor";
    case DownlinkKind::FromOther: return "from_other";
    case DownlinkKind::SelfEcho: return "self_echo";
    case DownlinkKind::Beacon: return "beacon";
  }
  return "?";
}

/// Header byte image.
///
///   0      slot_id_a
///   1      slot_id_b
///   2..3   data_len, big-endian, low 11 bits (upper 5 bits zero)
///   4      reserved (zero)
///   5      bit7 SEQ, bit6 ACK, bits5..4 SACK count - 1 (0 when no block), bits3..0 zero
///   6      seq_no
///   7      ack_no
///   8..15  four (start, length) SACK byte pairs; length 0 marks an unused pair
inline std::array<std::uint8_t, kHeaderSize> serialize_header(const LinkHeader& h) {
  if (h.data_len > kMaxDataLen) throw FormatError("header: data_len exceeds 11 bits");
  if (h.sack_blocks.size() > kMaxSackBlocks) throw FormatError("header: more than four SACK blocks");
  std::array<std::uint8_t, kHeaderSize> b{};
  b[0] = h.slot_id_a;
  b[1] = h.slot_id_b;
  b[2] = static_cast<std::uint8_t>((h.data_len >> 8) & 0x07);
  b[3] = static_cast<std::uint8_t>(h.data_len & 0xFF);
  std::uint8_t flags = 0;
  if (h.seq_flag) flags |= kFlagSeq;
  if (h.ack_flag) flags |= kFlagAck;
  if (!h.sack_blocks.empty())
    flags |= static_cast<std::uint8_t>((h.sack_blocks.size() - 1) << kSackCountShift);
  b[5] = flags;
  b[6] = h.seq_no;
  b[7] = h.ack_no;
  for (std::size_t i = 0; i < h.sack_blocks.size(); ++i) {
    if (h.sack_blocks[i].length == 0) throw FormatError("header: empty SACK block");
    b[8 + 2 * i] = h.sack_blocks[i].start_seq;
    b[9 + 2 * i] = h.sack_blocks[i].length;
  }
  return b;
}

inline LinkHeader parse_header(std::span<const std::uint8_t> b) {
  if (b.size() < kHeaderSize) throw FormatError("header: fewer than 16 bytes");
  if ((b[2] & 0xF8) != 0 || b[4] != 0 || (b[5] & 0x0F) != 0)
    throw FormatError("header: reserved bits set");
  LinkHeader h;
  h.slot_id_a = b[0];
  h.slot_id_b = b[1];
  h.data_len = static_cast<std::uint16_t>(((b[2] & 0x07) << 8) | b[3]);
  h.seq_flag = (b[5] & kFlagSeq) != 0;
  h.ack_flag = (b[5] & kFlagAck) != 0;
  h.seq_no = b[6];
  h.ack_no = b[7];
  const std::size_t count = b[9] == 0 ? 0 : static_cast<std::size_t>((b[5] >> kSackCountShift) & 0x03) + 1;
  if (count == 0 && ((b[5] >> kSackCountShift) & 0x03) != 0)
    throw FormatError("header: SACK count set without blocks");
  for (std::size_t i = 0; i < kMaxSackBlocks; ++i) {
    const std::uint8_t start = b[8 + 2 * i];
    const std::uint8_t len = b[9 + 2 * i];
    if (i < count) {
      if (len == 0) throw FormatError("header: empty SACK block");
      h.sack_blocks.push_back({start, len});
    } else if (start != 0 || len != 0) {
      throw FormatError("header: bytes beyond the SACK count");
    }
  }
  return h;
}

inline std::uint32_t read_crc(std::span<const std::uint8_t> b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_crc(std::span<std::uint8_t> b, std::uint32_t crc) {
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(crc >> (8 * i));
}

/// header || zero-padded data || CRC-32 (little-endian) over header and data.
inline std::vector<std::uint8_t> encode_packet(const LinkHeader& header, std::span<const std::uint8_t> payload,
                                               std::size_t data_size = kDefaultDataSize) {
  if (payload.size() > data_size || payload.size() > kMaxDataLen)
    throw FormatError("encode_packet: payload larger than the data section");
  LinkHeader h = header;
  h.data_len = static_cast<std::uint16_t>(payload.size());
  std::vector<std::uint8_t> out(packet_size(data_size), 0);
  const auto hb = serialize_header(h);
  std::copy(hb.begin(), hb.end(), out.begin());
  std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
  const auto covered = std::span<const std::uint8_t>(out).first(kHeaderSize + data_size);
  write_crc(std::span<std::uint8_t>(out).subspan(kHeaderSize + data_size), crc32_dot11(covered));
  return out;
}

struct DecodedPacket {
  LinkHeader header;
  std::vector<std::uint8_t> payload;
  std::uint32_t crc = 0;
  bool crc_ok = false;
};

/// CRC-32 check of a single-user image without parsing it.
inline bool image_crc_ok(std::span<const std::uint8_t> image, std::size_t data_size = kDefaultDataSize) {
  if (image.size() != packet_size(data_size)) throw FormatError("image_crc_ok: wrong packet length");
  return crc32_dot11(image.first(kHeaderSize + data_size)) == read_crc(image.subspan(kHeaderSize + data_size));
}

inline DecodedPacket decode_packet(std::span<const std::uint8_t> bytes, std::size_t data_size = kDefaultDataSize) {
  if (bytes.size() != packet_size(data_size)) throw FormatError("decode_packet: wrong packet length");
  DecodedPacket d;
  d.header = parse_header(bytes.first(kHeaderSize));
  if (d.header.data_len > data_size) throw FormatError("decode_packet: data_len exceeds data section");
  d.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + d.header.data_len);
  d.crc = read_crc(bytes.subspan(kHeaderSize + data_size));
  d.crc_ok = crc32_dot11(bytes.first(kHeaderSize + data_size)) == d.crc;
  return d;
}

/// Checks an XOR packet: the CRC of a XOR of two frames equals the plain
/// remainder of the XORed bits.
inline bool verify_xor_crc(std::span<const std::uint8_t> covered, std::uint32_t crc_rx,
                           std::size_t expected_len = kHeaderSize + kDefaultDataSize) {
  if (covered.size() != expected_len) throw FormatError("verify_xor_crc: wrong section length");
  return crc32_raw(covered) == crc_rx;
}

/// Checks a whole XOR image (covered bytes followed by the XORed CRC).
inline bool verify_xor_image(std::span<const std::uint8_t> image, std::size_t data_size = kDefaultDataSize) {
  if (image.size() != packet_size(data_size)) throw FormatError("verify_xor_image: wrong packet length");
  return verify_xor_crc(image.first(kHeaderSize + data_size), read_crc(image.subspan(kHeaderSize + data_size)),
                        kHeaderSize + data_size);
}

inline DownlinkKind classify_downlink(std::uint8_t slot_id_a, std::uint8_t slot_id_b, Role my_role) {
  const std::uint8_t mine = my_role == Role::EndNodeA ? slot_id_a : slot_id_b;
  const std::uint8_t other = my_role == Role::EndNodeA ? slot_id_b : slot_id_a;
  if (mine != 0 && other != 0) return DownlinkKind::XorPacket;
  if (mine == 0 && other != 0) return DownlinkKind::FromOther;
  if (mine != 0) return DownlinkKind::SelfEcho;
  return DownlinkKind::Beacon;
}

inline DownlinkKind classify_downlink(const LinkHeader& h, Role my_role) {
  return classify_downlink(h.slot_id_a, h.slot_id_b, my_role);
}

inline std::vector<std::uint8_t> xor_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw FormatError("xor: length mismatch");
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

inline std::vector<std::uint8_t> xor_extract(std::span<const std::uint8_t> xor_payload,
                                             std::span<const std::uint8_t> own_payload) {
  return xor_bytes(xor_payload, own_payload);
}

/// Superimposed uplink image: bitwise XOR everywhere except the two slot-ID
/// bytes, which each sender leaves zero for the other.
inline std::vector<std::uint8_t> superimpose(std::span<const std::uint8_t> from_a, std::span<const std::uint8_t> from_b) {
  auto out = xor_bytes(from_a, from_b);
  out[0] = from_a[0];
  out[1] = from_b[1];
  return out;
}

inline std::vector<std::uint8_t> beacon_image(std::size_t data_size = kDefaultDataSize) {
  return encode_packet(LinkHeader{}, {}, data_size);
}

}  // namespace rpnc::link
