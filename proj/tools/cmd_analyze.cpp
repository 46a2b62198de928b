#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

using emoc::Channel;

struct AnalyzeArgs {
  PipelineFlags flags;
  std::string session_id;
  bool json = false;
  std::string dump_timeline;
};

void print_human(const emoc::SessionMetrics& m, const emoc::CalmingVerdict& v) {
  std::printf("session %s  (%.1f s)\n", m.session_id.c_str(), m.duration_s);
  std::printf("verdict: %s%s\n", std::string(emoc::verdict_name(v.verdict)).c_str(),
              v.missing_inputs ? " (missing inputs)" : "");
  std::printf("%-18s %10s %10s %12s %10s %10s %8s\n", "channel", "mean", "std", "slope/min",
              "time_r", "stab", "miss%");
  for (Channel c : emoc::all_channels()) {
    const auto& stats = m.channel(c);
    if (!stats) {
      std::printf("%-18s %10s\n", std::string(emoc::metric_channel_name(c)).c_str(), "-");
      continue;
    }
    const auto cell = [](const std::optional<double>& x) {
      char buf[16];
      if (!x) return std::string("-");
      std::snprintf(buf, sizeof(buf), "%.4g", *x);
      return std::string(buf);
    };
    std::printf("%-18s %10s %10s %12s %10s %10s %7.1f%%\n",
                std::string(emoc::metric_channel_name(c)).c_str(), cell(stats->mean).c_str(),
                cell(stats->stddev).c_str(), cell(stats->slope_per_min).c_str(),
                cell(stats->time_corr).c_str(), cell(stats->stabilization).c_str(),
                stats->missing_fraction * 100.0);
  }
}

void run(const AnalyzeArgs& args) {
  const ConfigFile cfg = load_config(args.flags);
  const auto store = open_reader(resolve_store_dir(args.flags, cfg));
  const auto opts = resolve_analyze(args.flags, cfg);

  auto session = store.load_session(args.session_id);
  if (!session.ok()) fail(session.error().detail);

  auto analysis = emoc::analyze_session(session.value(), opts);
  if (!analysis.ok()) {
    fail("analysis failed: " + std::string(emoc::stat_error_name(analysis.error().kind)));
  }

  if (!args.dump_timeline.empty()) {
    std::ofstream out(args.dump_timeline, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write " + args.dump_timeline);
    out << emoc::timeline_csv(analysis.value().timeline);
  }

  if (args.json) {
    std::cout << emoc::session_metrics_json(analysis.value().metrics, &analysis.value().verdict)
              << "\n";
  } else {
    print_human(analysis.value().metrics, analysis.value().verdict);
  }
}

}  // namespace

void register_analyze(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<AnalyzeArgs>();
  CLI::App* cmd = app.add_subcommand("analyze", "Compute metrics for one stored session");
  cmd->add_option("--store", args->flags.store_dir, "Session store directory");
  cmd->add_option("--config", args->flags.config_path, "JSON config file");
  cmd->add_option("--session", args->session_id, "Session id")->required();
  cmd->add_flag("--json", args->json, "Emit metrics as JSON");
  cmd->add_option("--dump-timeline", args->dump_timeline, "Write the aligned grid as CSV");
  cmd->add_option("--grid-step-ms", args->flags.grid_step_ms, "Grid step (default 1000)");
  cmd->add_option("--rolling-window", args->flags.rolling_window,
                  "Rolling-std window in grid points (default 30)");
  cmd->add_option("--calibration", args->flags.calibration_path, "Calibration JSON file");
  cmd->callback([args, &exit_code] { exit_code = guarded("analyze", [&] { run(*args); }); });
}

}  // namespace emoctool
