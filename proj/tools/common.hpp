#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "emotioncarrier/pipeline.hpp"
#include "emotioncarrier/store.hpp"

namespace emoctool {

// Runtime failures unwind to main via this; exit code 2 by convention.
struct ToolError {
  int code;
  std::string message;
};

[[noreturn]] inline void fail(const std::string& message, int code = 2) {
  throw ToolError{code, message};
}

// Parsed --config FILE (JSON object). Flag values win over config values,
// which win over built-in defaults; the resolve_* helpers below implement
// that by only consulting the config when the flag was not set.
class ConfigFile {
 public:
  ConfigFile() = default;
  static ConfigFile load(const std::string& path);

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!doc_.is_object() || !doc_.contains(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail("config key '" + key + "' has the wrong type");
    }
  }

  const nlohmann::json& raw() const { return doc_; }

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

// Shared option bundle: every subcommand that touches the pipeline takes the
// same knobs.
struct PipelineFlags {
  std::string config_path;
  std::string store_dir;
  std::string calibration_path;
  std::optional<double> threshold_gf;
  std::optional<int> arm_count;
  std::optional<double> idle_timeout_s;
  std::optional<int64_t> max_out_of_order_ms;
  std::optional<int64_t> grid_step_ms;
  std::optional<int> rolling_window;
};

ConfigFile load_config(const PipelineFlags& flags);
std::string resolve_store_dir(const PipelineFlags& flags, const ConfigFile& cfg);
emoc::CalibrationBook resolve_calibration(const PipelineFlags& flags, const ConfigFile& cfg);
emoc::SegmenterConfig resolve_segmenter(const PipelineFlags& flags, const ConfigFile& cfg);
emoc::AnalyzeOptions resolve_analyze(const PipelineFlags& flags, const ConfigFile& cfg);

emoc::SessionStore open_reader(const std::string& dir);
emoc::SessionStore open_writer(const std::string& dir);

// "HOST:PORT" or ":PORT"; exits with a usage-style failure on bad input.
std::pair<std::string, uint16_t> parse_endpoint(const std::string& text,
                                                const std::string& default_host = "127.0.0.1");

}  // namespace emoctool
