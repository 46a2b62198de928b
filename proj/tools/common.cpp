#include "common.hpp"

#include <fstream>

#include "../core/src/net.hpp"

namespace emoctool {

using emoc::CalibrationBook;
using emoc::SegmenterConfig;

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  ConfigFile cfg;
  cfg.doc_ = nlohmann::json::parse(in, nullptr, false);
  if (cfg.doc_.is_discarded() || !cfg.doc_.is_object()) {
    fail("config file is not a JSON object: " + path);
  }
  return cfg;
}

ConfigFile load_config(const PipelineFlags& flags) {
  if (flags.config_path.empty()) return {};
  return ConfigFile::load(flags.config_path);
}

std::string resolve_store_dir(const PipelineFlags& flags, const ConfigFile& cfg) {
  if (!flags.store_dir.empty()) return flags.store_dir;
  return cfg.get<std::string>("store", "./store");
}

CalibrationBook resolve_calibration(const PipelineFlags& flags, const ConfigFile& cfg) {
  std::string path = flags.calibration_path;
  if (path.empty()) path = cfg.get<std::string>("calibration", "");
  if (path.empty()) return {};
  auto book = CalibrationBook::load(path);
  if (!book.ok()) fail(book.error());
  return book.value();
}

SegmenterConfig resolve_segmenter(const PipelineFlags& flags, const ConfigFile& cfg) {
  SegmenterConfig seg;
  seg.pressure_threshold_gf =
      flags.threshold_gf.value_or(cfg.get<double>("threshold_gf", seg.pressure_threshold_gf));
  seg.arm_count = flags.arm_count.value_or(cfg.get<int>("arm_count", seg.arm_count));
  const double idle_s = flags.idle_timeout_s.value_or(
      cfg.get<double>("idle_timeout_s", static_cast<double>(seg.idle_timeout_ms) / 1000.0));
  seg.idle_timeout_ms = static_cast<int64_t>(idle_s * 1000.0);
  seg.max_out_of_order_ms = flags.max_out_of_order_ms.value_or(
      cfg.get<int64_t>("max_out_of_order_ms", seg.max_out_of_order_ms));
  seg.calibration = resolve_calibration(flags, cfg).fallback;
  if (auto why = config_violation(seg)) fail("bad segmenter settings: " + *why);
  return seg;
}

emoc::AnalyzeOptions resolve_analyze(const PipelineFlags& flags, const ConfigFile& cfg) {
  emoc::AnalyzeOptions opts;
  opts.align.grid_step_ms =
      flags.grid_step_ms.value_or(cfg.get<int64_t>("grid_step_ms", opts.align.grid_step_ms));
  opts.metrics.rolling_window = static_cast<size_t>(flags.rolling_window.value_or(
      cfg.get<int>("rolling_window", static_cast<int>(opts.metrics.rolling_window))));
  opts.thresholds.hr_slope_min = cfg.get<double>("hr_slope_min", opts.thresholds.hr_slope_min);
  opts.thresholds.rr_slope_min = cfg.get<double>("rr_slope_min", opts.thresholds.rr_slope_min);
  opts.thresholds.stab_max = cfg.get<double>("stab_max", opts.thresholds.stab_max);
  opts.calibration = resolve_calibration(flags, cfg);
  if (opts.align.grid_step_ms <= 0) fail("grid_step_ms must be > 0");
  return opts;
}

emoc::SessionStore open_reader(const std::string& dir) {
  auto store = emoc::SessionStore::open_reader(dir);
  if (!store.ok()) fail(store.error().detail);
  return std::move(store).value();
}

emoc::SessionStore open_writer(const std::string& dir) {
  auto store = emoc::SessionStore::open_writer(dir);
  if (!store.ok()) fail(store.error().detail);
  return std::move(store).value();
}

std::pair<std::string, uint16_t> parse_endpoint(const std::string& text,
                                                const std::string& default_host) {
  auto parsed = emoc::net::parse_host_port(text, default_host);
  if (!parsed) fail("bad HOST:PORT: " + text);
  return {parsed->host, parsed->port};
}

}  // namespace emoctool
