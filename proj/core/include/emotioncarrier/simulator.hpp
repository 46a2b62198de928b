#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emotioncarrier/telemetry.hpp"

namespace emoc {

// Shape of one simulated channel: an exponential drift from
// baseline + drift_amplitude toward baseline, plus gaussian noise whose
// std decays from noise_sigma0 to noise_sigma0 * noise_floor_fraction.
struct ChannelProfile {
  double baseline = 0.0;
  double drift_amplitude = 0.0;     // signed; value starts at baseline + amplitude
  double drift_tau_s = 1.0;         // > 0
  double noise_sigma0 = 0.0;        // >= 0
  double noise_floor_fraction = 1.0;  // in [0, 1]
  double noise_tau_s = 1.0;         // > 0
  int64_t sample_period_ms = 1000;  // > 0
};

inline constexpr int64_t kDefaultSimStartMs = 1700000000000;  // fixed epoch anchor

struct SimProfile {
  std::array<ChannelProfile, kChannelCount> channels;
  double session_duration_s = 600.0;  // > 0
  uint64_t seed = 0;
  std::string device_id = "carrier-01";
  std::string participant_id = "anonymous";
  int64_t start_ts_ms = kDefaultSimStartMs;
};

std::optional<std::string> profile_violation(const ChannelProfile& p);
std::optional<std::string> profile_violation(const SimProfile& p);

// Closed-form midline and noise std at elapsed seconds t.
double drift_value(const ChannelProfile& p, double t_s);
double noise_sigma(const ChannelProfile& p, double t_s);

// Synthesizes one session: per channel, samples at t = 0, p, 2p, ...
// <= duration with value = clamp(drift + sigma(t) * xi), xi standard normal
// from a SplitMix64 + Box-Muller stream seeded by (seed, channel). Frames are
// returned in global timestamp order with per-channel monotonic seq starting
// at 0. Identical profiles produce identical frames, byte for byte once
// encoded. Throws std::invalid_argument on an invalid profile.
std::vector<SensorFrame> generate_session(const SimProfile& profile);

struct CohortSpec {
  int n_sessions = 30;  // >= 1
  SimProfile base_profile;
  // Per-session baseline drift: session k adds slope * k + jitter to each
  // channel's baseline (jitter ~ N(0, jitter_sigma), seeded per session).
  std::array<double, kChannelCount> baseline_slope_per_session{};
  std::array<double, kChannelCount> baseline_jitter_sigma{};
  uint64_t seed = 0;
  int64_t session_stagger_ms = 4200000;  // gap between session starts
};

std::optional<std::string> cohort_violation(const CohortSpec& spec);

// Effective parameters of one cohort session; the ground-truth manifest unit.
struct SessionRecipe {
  int index = 0;
  SimProfile profile;  // fully resolved: baseline shifts, seed, start applied
};

std::vector<SessionRecipe> plan_cohort(const CohortSpec& spec);

struct CohortSession {
  SessionRecipe recipe;
  std::vector<SensorFrame> frames;
};

std::vector<CohortSession> generate_cohort(const CohortSpec& spec);

// Presets; the calming one reproduces the qualitative session dynamics the
// analytics assert on (rising stable pressure, quieting noise, settling
// vitals), the agitated one is its mirror (drift amplitudes negated).
SimProfile calming_profile();
SimProfile agitated_profile();
CohortSpec calming_cohort(int n_sessions, uint64_t seed);
CohortSpec agitated_cohort(int n_sessions, uint64_t seed);
std::optional<SimProfile> preset_profile(std::string_view name);
std::optional<CohortSpec> preset_cohort(std::string_view name, int n_sessions, uint64_t seed);

}  // namespace emoc
