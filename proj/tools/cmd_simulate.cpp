#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "emotioncarrier/replay.hpp"
#include "emotioncarrier/simulator.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

using emoc::Channel;
using ordered_json = nlohmann::ordered_json;

struct SimulateArgs {
  std::string preset = "calming";
  int sessions = 1;
  uint64_t seed = 7;
  std::string out_dir;
  std::string stream_target;
  double duration_s = 0.0;  // 0 = preset default
  std::string device = "carrier-01";
  std::string participant = "p-01";
};

ordered_json channel_profile_json(const emoc::ChannelProfile& cp) {
  ordered_json j;
  j["baseline"] = cp.baseline;
  j["drift_amplitude"] = cp.drift_amplitude;
  j["drift_tau_s"] = cp.drift_tau_s;
  j["noise_sigma0"] = cp.noise_sigma0;
  j["noise_floor_fraction"] = cp.noise_floor_fraction;
  j["noise_tau_s"] = cp.noise_tau_s;
  j["sample_period_ms"] = cp.sample_period_ms;
  return j;
}

void run(const SimulateArgs& args) {
  if (args.out_dir.empty() && args.stream_target.empty()) {
    fail("simulate needs --out DIR and/or --stream HOST:PORT");
  }

  auto cohort = emoc::preset_cohort(args.preset, args.sessions, args.seed);
  if (!cohort) fail("unknown preset: " + args.preset + " (calming|agitated)");
  cohort->base_profile.device_id = args.device;
  cohort->base_profile.participant_id = args.participant;
  if (args.duration_s > 0.0) cohort->base_profile.session_duration_s = args.duration_s;

  const auto sessions = emoc::generate_cohort(*cohort);

  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    ordered_json manifest;
    manifest["v"] = 1;
    manifest["preset"] = args.preset;
    manifest["seed"] = args.seed;
    manifest["n_sessions"] = args.sessions;
    manifest["rng"] = "splitmix64+box-muller";
    manifest["sessions"] = ordered_json::array();

    for (const auto& s : sessions) {
      char name[32];
      std::snprintf(name, sizeof(name), "session-%03d.jsonl", s.recipe.index);
      const auto path = std::filesystem::path(args.out_dir) / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) fail("cannot write " + path.string());
      for (const auto& frame : s.frames) {
        auto line = emoc::encode_frame(frame);
        if (!line.ok()) fail("generated frame failed validation: " + line.error().reason);
        out << line.value();
      }
      if (!out) fail("short write to " + path.string());

      ordered_json entry;
      entry["index"] = s.recipe.index;
      entry["file"] = name;
      entry["seed"] = s.recipe.profile.seed;
      entry["device_id"] = s.recipe.profile.device_id;
      entry["participant_id"] = s.recipe.profile.participant_id;
      entry["start_ts_ms"] = s.recipe.profile.start_ts_ms;
      entry["duration_s"] = s.recipe.profile.session_duration_s;
      entry["frames"] = s.frames.size();
      ordered_json channels;
      for (Channel c : emoc::all_channels()) {
        channels[std::string(emoc::channel_name(c))] =
            channel_profile_json(s.recipe.profile.channels[emoc::channel_index(c)]);
      }
      entry["channels"] = std::move(channels);
      manifest["sessions"].push_back(std::move(entry));
    }

    std::ofstream mf(std::filesystem::path(args.out_dir) / "manifest.json",
                     std::ios::binary | std::ios::trunc);
    mf << manifest.dump(2) << "\n";
    if (!mf) fail("cannot write manifest.json");
    std::cerr << "simulate: wrote " << sessions.size() << " session file(s) to " << args.out_dir
              << "\n";
  }

  if (!args.stream_target.empty()) {
    const auto [host, port] = parse_endpoint(args.stream_target);
    for (const auto& s : sessions) {
      emoc::ReplayOptions opts;
      opts.max_speed = true;
      opts.participant = s.recipe.profile.participant_id;
      auto sent = emoc::stream_frames(s.frames, host, port, opts);
      if (!sent.ok()) fail("streaming session failed: " + sent.error().message);
    }
    std::cerr << "simulate: streamed " << sessions.size() << " session(s) to "
              << args.stream_target << "\n";
  }
}

}  // namespace

void register_simulate(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand(
      "simulate", "Generate seeded synthetic sessions (files and/or live stream)");
  cmd->add_option("--preset", args->preset, "Session preset: calming|agitated")
      ->capture_default_str();
  cmd->add_option("--sessions", args->sessions, "Number of sessions")->capture_default_str();
  cmd->add_option("--seed", args->seed, "Cohort seed")->capture_default_str();
  cmd->add_option("--out", args->out_dir, "Output directory (frame files + manifest.json)");
  cmd->add_option("--stream", args->stream_target, "Stream frames to a live ingest HOST:PORT");
  cmd->add_option("--duration-s", args->duration_s, "Per-session duration override, seconds");
  cmd->add_option("--device", args->device, "Device id")->capture_default_str();
  cmd->add_option("--participant", args->participant, "Participant id")->capture_default_str();
  cmd->callback([args, &exit_code] { exit_code = guarded("simulate", [&] { run(*args); }); });
}

}  // namespace emoctool
