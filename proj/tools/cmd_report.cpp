#include <iostream>
#include <memory>

#include "emotioncarrier/gateway.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

struct ReportArgs {
  PipelineFlags flags;
  std::string session_id;
  std::string gateway_config;
  bool offline = false;
  bool json = false;
  int cohort_window = 10;
  std::string installation_model = "emotioncarrier/0.1";
  std::string watch_model = "simwatch/0.1";
};

void run(const ReportArgs& args) {
  if (!args.offline && args.gateway_config.empty()) {
    fail("report needs --gateway-config FILE or --offline");
  }

  const ConfigFile cfg = load_config(args.flags);
  auto store = open_reader(resolve_store_dir(args.flags, cfg));
  const auto opts = resolve_analyze(args.flags, cfg);

  auto session = store.load_session(args.session_id);
  if (!session.ok()) fail(session.error().detail);
  auto analysis = emoc::analyze_session(session.value(), opts);
  if (!analysis.ok()) {
    fail("analysis failed: " + std::string(emoc::stat_error_name(analysis.error().kind)));
  }
  const auto& metrics = analysis.value().metrics;
  const auto& verdict = analysis.value().verdict;

  // Cross-session context: every stored session up to and including this one.
  emoc::CohortContext cohort;
  {
    emoc::ListFilter filter;
    filter.start_at_or_before_ms = session.value().start_ts_ms;
    if (auto table = emoc::aggregate_store(store, opts, filter); table.ok()) {
      cohort = emoc::build_cohort_context(table.value().metrics, args.cohort_window);
    }
  }

  emoc::FeedbackReport report;
  if (args.offline) {
    report = emoc::template_feedback(metrics, verdict);
  } else {
    auto gateway_cfg = emoc::load_gateway_config(args.gateway_config);
    if (!gateway_cfg.ok()) fail(gateway_cfg.error());
    emoc::DeviceInfo devices{args.installation_model, args.watch_model};
    auto payload = emoc::build_payload(metrics, verdict, cohort, devices);
    if (!payload.ok()) fail("payload: " + payload.error().reason);
    auto remote = emoc::request_feedback(payload.value(), gateway_cfg.value());
    if (remote.ok()) {
      report = std::move(remote).value();
    } else {
      // Gateway trouble never sinks the pipeline; fall back to the template.
      std::cerr << "report: gateway " << emoc::gateway_error_name(remote.error().kind) << " ("
                << remote.error().detail << "), using template fallback\n";
      report = emoc::template_feedback(metrics, verdict);
    }
  }

  if (auto err = store.save_report(report)) {
    std::cerr << "report: could not persist report: " << err->detail << "\n";
  }

  if (args.json) {
    std::cout << emoc::report_to_json(report) << "\n";
  } else {
    std::cout << "session  " << report.session_id << "\n"
              << "source   " << emoc::report_source_name(report.source) << "\n"
              << "verdict  " << emoc::verdict_name(report.verdict) << "\n"
              << "words    ";
    for (size_t i = 0; i < report.prompt_words.size(); ++i) {
      std::cout << (i ? ", " : "") << report.prompt_words[i];
    }
    std::cout << "\n\n" << report.narrative << "\n";
  }
}

}  // namespace

void register_report(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<ReportArgs>();
  CLI::App* cmd =
      app.add_subcommand("report", "Produce the post-session feedback report for one session");
  cmd->add_option("--store", args->flags.store_dir, "Session store directory");
  cmd->add_option("--config", args->flags.config_path, "JSON config file");
  cmd->add_option("--session", args->session_id, "Session id")->required();
  auto* gw = cmd->add_option("--gateway-config", args->gateway_config,
                             "Gateway config JSON (endpoint, model, timeout_ms, ...)");
  cmd->add_flag("--offline", args->offline, "Skip the gateway, use the template")
      ->excludes(gw);
  cmd->add_flag("--json", args->json, "Emit the report as JSON");
  cmd->add_option("--cohort-window", args->cohort_window,
                  "Sessions of trend context in the payload")
      ->capture_default_str();
  cmd->add_option("--installation-model", args->installation_model, "Installation descriptor")
      ->capture_default_str();
  cmd->add_option("--watch-model", args->watch_model, "Watch descriptor")
      ->capture_default_str();
  cmd->add_option("--grid-step-ms", args->flags.grid_step_ms, "Grid step (default 1000)");
  cmd->add_option("--rolling-window", args->flags.rolling_window,
                  "Rolling-std window (default 30)");
  cmd->add_option("--calibration", args->flags.calibration_path, "Calibration JSON file");
  cmd->callback([args, &exit_code] { exit_code = guarded("report", [&] { run(*args); }); });
}

}  // namespace emoctool
