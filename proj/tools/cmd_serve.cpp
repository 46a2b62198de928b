#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include "emotioncarrier/ingest.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

std::atomic<bool> g_shutdown{false};

void on_signal(int) { g_shutdown.store(true); }

struct ServeArgs {
  PipelineFlags flags;
  std::string listen = "127.0.0.1:7071";
};

void run(const ServeArgs& args) {
  const ConfigFile cfg = load_config(args.flags);
  const auto [host, port] = parse_endpoint(
      args.listen.empty() ? cfg.get<std::string>("listen", "127.0.0.1:7071") : args.listen);

  auto store = open_writer(resolve_store_dir(args.flags, cfg));
  emoc::IngestService service(store, resolve_segmenter(args.flags, cfg),
                              resolve_calibration(args.flags, cfg));
  auto bound = service.start(host, port);
  if (!bound.ok()) fail(bound.error().message);

  g_shutdown.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serve: listening on " << host << ":" << bound.value() << ", store at "
            << store.root().string() << "\n";

  while (!g_shutdown.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  std::cerr << "serve: shutting down, flushing open sessions\n";
  service.stop();

  const auto c = service.counters();
  std::cerr << "serve: connections=" << c.connections << " lines=" << c.lines_in
            << " frames=" << c.frames_accepted << " decode_errors=" << c.decode_errors
            << " stale=" << c.stale_frames << " sessions=" << c.sessions_closed
            << " persisted_frames=" << c.frames_persisted << "\n";
}

}  // namespace

void register_serve(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<ServeArgs>();
  CLI::App* cmd = app.add_subcommand("serve", "Run the streaming ingest server");
  cmd->add_option("--listen", args->listen, "HOST:PORT to listen on")->capture_default_str();
  cmd->add_option("--store", args->flags.store_dir, "Session store directory");
  cmd->add_option("--config", args->flags.config_path, "JSON config file");
  cmd->add_option("--threshold-gf", args->flags.threshold_gf,
                  "Pressure threshold in gram-force (default 5)");
  cmd->add_option("--arm-count", args->flags.arm_count,
                  "Consecutive above-threshold samples to open a session (default 3)");
  cmd->add_option("--idle-timeout-s", args->flags.idle_timeout_s,
                  "Silence that closes a session, seconds (default 30)");
  cmd->add_option("--max-out-of-order-ms", args->flags.max_out_of_order_ms,
                  "Reordering tolerance (default 2000)");
  cmd->add_option("--calibration", args->flags.calibration_path, "Calibration JSON file");
  cmd->callback([args, &exit_code] { exit_code = guarded("serve", [&] { run(*args); }); });
}

}  // namespace emoctool
