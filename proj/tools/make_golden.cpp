// Regenerates tests/golden. Usage: make_golden <dir>
#include <cstdio>
#include <fstream>
#include <string>

#include "rpnc/baseband.hpp"
#include "rpnc/cli/bench.hpp"
#include "rpnc/link.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rpnc;
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_golden <dir>\n");
    return 1;
  }
  const std::string dir = argv[1];
  const baseband::OfdmParams p;
  const std::uint64_t seed = baseband::kDefaultPreambleSeed;

  baseband::write_manifest(dir + "/preambles.txt", {{"seed", std::to_string(seed)},
                                                    {"n_subcarriers", std::to_string(p.n_subcarriers)},
                                                    {"cp_len", std::to_string(p.cp_len)},
                                                    {"sts_len", std::to_string(p.sts_len)}});
  for (auto role : {Role::EndNodeA, Role::EndNodeB, Role::Relay})
    baseband::write_cf32(dir + "/preamble_" + std::string(to_string(role)) + ".cf32",
                         baseband::gen_preamble(role, p, seed));

  const auto bench = cli::make_uplink_bench(p, seed, 2000, 4);
  const auto ex = baseband::sync_exhaustive_cross(bench.y, bench.preambles);
  baseband::write_cf32(dir + "/bench_uplink.cf32", bench.y);
  baseband::write_manifest(dir + "/bench_uplink.txt",
                           {{"seed", std::to_string(seed)}, {"detections", cli::detections_string(ex.detections)}});

  write_text(dir + "/packet_beacon.hex", link::hexdump(link::beacon_image()));
  link::LinkHeader h;
  h.slot_id_a = 7;
  h.seq_flag = true;
  h.ack_flag = true;
  h.seq_no = 42;
  h.ack_no = 17;
  h.sack_blocks = {{19, 2}, {23, 1}};
  std::vector<std::uint8_t> payload;
  for (int i = 0; i < 100; ++i) payload.push_back(static_cast<std::uint8_t>(i));
  const auto a = link::encode_packet(h, payload);
  write_text(dir + "/packet_data_a.hex", link::hexdump(a));
  link::LinkHeader hb;
  hb.slot_id_b = 200;
  hb.ack_flag = true;
  hb.ack_no = 41;
  const auto b = link::encode_packet(hb, {});
  write_text(dir + "/packet_ack_b.hex", link::hexdump(b));
  write_text(dir + "/packet_xor.hex", link::hexdump(link::superimpose(a, b)));
  std::printf("wrote golden vectors to %s\n", dir.c_str());
  return 0;
}
