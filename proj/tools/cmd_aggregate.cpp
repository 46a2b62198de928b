#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

struct AggregateArgs {
  PipelineFlags flags;
  std::string out_path;
  bool json = false;
  std::string participant;
};

void run(const AggregateArgs& args) {
  const ConfigFile cfg = load_config(args.flags);
  const auto store = open_reader(resolve_store_dir(args.flags, cfg));
  const auto opts = resolve_analyze(args.flags, cfg);

  emoc::ListFilter filter;
  if (!args.participant.empty()) filter.participant = args.participant;

  auto table = emoc::aggregate_store(store, opts, filter);
  if (!table.ok()) fail(table.error().detail);
  if (table.value().rows.empty()) fail("no sessions");

  const std::string csv = emoc::cohort_csv(table.value());
  if (!args.out_path.empty() && args.out_path != "-") {
    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write " + args.out_path);
    out << csv;
    std::cerr << "aggregate: wrote " << table.value().rows.size() << " row(s) to "
              << args.out_path << "\n";
  }

  if (args.json) {
    nlohmann::ordered_json doc;
    doc["v"] = 1;
    doc["sessions"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < table.value().metrics.size(); ++i) {
      doc["sessions"].push_back(nlohmann::ordered_json::parse(
          emoc::session_metrics_json(table.value().metrics[i], nullptr)));
    }
    std::cout << doc.dump() << "\n";
  } else if (args.out_path.empty() || args.out_path == "-") {
    std::cout << csv;
  }
}

}  // namespace

void register_aggregate(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<AggregateArgs>();
  CLI::App* cmd = app.add_subcommand(
      "aggregate", "Emit the cross-session trend table (per-session means + stability)");
  cmd->add_option("--store", args->flags.store_dir, "Session store directory");
  cmd->add_option("--config", args->flags.config_path, "JSON config file");
  cmd->add_option("--out", args->out_path, "CSV output path ('-' for stdout)");
  cmd->add_flag("--json", args->json, "Emit per-session metrics as JSON to stdout");
  cmd->add_option("--participant", args->participant, "Only this participant's sessions");
  cmd->add_option("--grid-step-ms", args->flags.grid_step_ms, "Grid step (default 1000)");
  cmd->add_option("--rolling-window", args->flags.rolling_window,
                  "Rolling-std window (default 30)");
  cmd->add_option("--calibration", args->flags.calibration_path, "Calibration JSON file");
  cmd->callback([args, &exit_code] { exit_code = guarded("aggregate", [&] { run(*args); }); });
}

}  // namespace emoctool
