#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rpnc/cli/experiments.hpp"

int main(int argc, char** argv) {
  using namespace rpnc::cli;
  CLI::App app{"RPNC two-way relay experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> slots;
  unsigned threads = 0;
  bool check = false, plot = false;
  app.add_option("--config", config_path, "JSON config or a previous manifest.json")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--slots", slots, "override the slot count");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_flag("--assert", check, "exit 2 when a threshold check fails");
  app.add_flag("--plot", plot, "also write SVG plots");

  for (const auto& c : commands()) app.add_subcommand(c.name, c.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  Options o;
  try {
    if (!config_path.empty()) o.base = load_config_or_manifest(config_path);
    if (seed) o.base.seed = *seed;
    if (slots) o.base.slots = *slots;
    o.base.validate();
  } catch (const rpnc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  o.out_dir = out_dir;
  o.plot = plot;
  o.threads = threads;

  const auto* sub = app.get_subcommands().front();
  for (const auto& c : commands()) {
    if (sub->get_name() != c.name) continue;
    Outcome out;
    try {
      out = c.fn(o);
    } catch (const rpnc::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    }
    for (const auto& ch : out.checks)
      std::printf("%s %s%s%s\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(), ch.detail.empty() ? "" : ": ",
                  ch.detail.c_str());
    std::printf("wrote %zu files to %s\n", out.files.size() + 1, o.out_dir.c_str());
    return check && !out.all_pass() ? 2 : 0;
  }
  return 1;
}
