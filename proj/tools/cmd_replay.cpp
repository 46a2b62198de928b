#include <iostream>
#include <memory>

#include "emotioncarrier/replay.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

struct ReplayArgs {
  std::string file;
  std::string target = "127.0.0.1:7071";
  std::string speed = "1";
  std::string participant;
};

void run(const ReplayArgs& args) {
  emoc::ReplayOptions opts;
  opts.participant = args.participant;
  if (args.speed == "max") {
    opts.max_speed = true;
  } else {
    try {
      opts.speed = std::stod(args.speed);
    } catch (...) {
      fail("--speed takes a positive number or 'max'");
    }
    if (opts.speed <= 0.0) fail("--speed takes a positive number or 'max'");
  }

  const auto [host, port] = parse_endpoint(args.target);
  auto stats = emoc::replay_file(args.file, host, port, opts);
  if (!stats.ok()) fail(stats.error().message);
  std::cerr << "replay: sent " << stats.value().frames_sent << " frame(s), "
            << stats.value().bytes_sent << " byte(s)\n";
}

}  // namespace

void register_replay(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<ReplayArgs>();
  CLI::App* cmd = app.add_subcommand("replay", "Stream a recorded frame file to an ingest server");
  cmd->add_option("--file", args->file, "Frame-per-line file (bare frames or a stored session)")
      ->required();
  cmd->add_option("--target", args->target, "Ingest HOST:PORT")->capture_default_str();
  cmd->add_option("--speed", args->speed, "Pacing multiplier or 'max'")->capture_default_str();
  cmd->add_option("--participant", args->participant,
                  "Participant for the hello line (stored-session headers win)");
  cmd->callback([args, &exit_code] { exit_code = guarded("replay", [&] { run(*args); }); });
}

}  // namespace emoctool
