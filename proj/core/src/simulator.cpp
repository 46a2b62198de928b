#include "emotioncarrier/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emotioncarrier/rng.hpp"

namespace emoc {

std::optional<std::string> profile_violation(const ChannelProfile& p) {
  if (!(p.drift_tau_s > 0.0)) return "drift_tau_s must be > 0";
  if (!(p.noise_sigma0 >= 0.0)) return "noise_sigma0 must be >= 0";
  if (p.noise_floor_fraction < 0.0 || p.noise_floor_fraction > 1.0) {
    return "noise_floor_fraction must be in [0,1]";
  }
  if (!(p.noise_tau_s > 0.0)) return "noise_tau_s must be > 0";
  if (p.sample_period_ms <= 0) return "sample_period_ms must be > 0";
  return std::nullopt;
}

std::optional<std::string> profile_violation(const SimProfile& p) {
  if (!(p.session_duration_s > 0.0)) return "session_duration_s must be > 0";
  if (p.device_id.empty() || p.device_id.size() > kMaxDeviceIdLen) return "bad device_id";
  if (p.start_ts_ms < 0) return "start_ts_ms must be >= 0";
  for (const auto& cp : p.channels) {
    if (auto why = profile_violation(cp)) return why;
  }
  return std::nullopt;
}

double drift_value(const ChannelProfile& p, double t_s) {
  return p.baseline + p.drift_amplitude * std::exp(-t_s / p.drift_tau_s);
}

double noise_sigma(const ChannelProfile& p, double t_s) {
  const double f = p.noise_floor_fraction;
  return p.noise_sigma0 * (f + (1.0 - f) * std::exp(-t_s / p.noise_tau_s));
}

std::vector<SensorFrame> generate_session(const SimProfile& profile) {
  if (auto why = profile_violation(profile)) {
    throw std::invalid_argument("invalid sim profile: " + *why);
  }

  const int64_t duration_ms = static_cast<int64_t>(std::llround(profile.session_duration_s * 1000.0));
  std::vector<SensorFrame> frames;

  for (Channel c : all_channels()) {
    const ChannelProfile& cp = profile.channels[channel_index(c)];
    NormalSampler noise(derive_stream_seed(profile.seed, static_cast<uint64_t>(channel_index(c))));
    uint64_t seq = 0;
    for (int64_t t_ms = 0; t_ms <= duration_ms; t_ms += cp.sample_period_ms) {
      const double t_s = static_cast<double>(t_ms) / 1000.0;
      const double xi = noise.next();
      const double raw = drift_value(cp, t_s) + noise_sigma(cp, t_s) * xi;

      SensorFrame f;
      f.device_id = profile.device_id;
      f.channel = c;
      f.timestamp_ms = profile.start_ts_ms + t_ms;
      f.value = clamp_to_range(c, raw);
      f.seq = seq++;
      frames.push_back(std::move(f));
    }
  }

  std::stable_sort(frames.begin(), frames.end(), [](const SensorFrame& a, const SensorFrame& b) {
    if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
    return channel_index(a.channel) < channel_index(b.channel);
  });
  return frames;
}

std::optional<std::string> cohort_violation(const CohortSpec& spec) {
  if (spec.n_sessions < 1) return "n_sessions must be >= 1";
  if (spec.session_stagger_ms <= 0) return "session_stagger_ms must be > 0";
  for (double sigma : spec.baseline_jitter_sigma) {
    if (!(sigma >= 0.0)) return "jitter sigma must be >= 0";
  }
  return profile_violation(spec.base_profile);
}

std::vector<SessionRecipe> plan_cohort(const CohortSpec& spec) {
  if (auto why = cohort_violation(spec)) {
    throw std::invalid_argument("invalid cohort spec: " + *why);
  }

  std::vector<SessionRecipe> recipes;
  recipes.reserve(static_cast<size_t>(spec.n_sessions));
  for (int k = 0; k < spec.n_sessions; ++k) {
    SessionRecipe r;
    r.index = k;
    r.profile = spec.base_profile;
    r.profile.seed = derive_stream_seed(spec.seed, 0x100000ull + static_cast<uint64_t>(k));
    r.profile.start_ts_ms = spec.base_profile.start_ts_ms + spec.session_stagger_ms * k;
    for (Channel c : all_channels()) {
      const int i = channel_index(c);
      double jitter = 0.0;
      if (spec.baseline_jitter_sigma[i] > 0.0) {
        NormalSampler jitter_rng(derive_stream_seed(
            spec.seed, 0x200000ull + static_cast<uint64_t>(k) * kChannelCount + i));
        jitter = spec.baseline_jitter_sigma[i] * jitter_rng.next();
      }
      r.profile.channels[i].baseline += spec.baseline_slope_per_session[i] * k + jitter;
    }
    recipes.push_back(std::move(r));
  }
  return recipes;
}

std::vector<CohortSession> generate_cohort(const CohortSpec& spec) {
  std::vector<CohortSession> out;
  for (auto& recipe : plan_cohort(spec)) {
    CohortSession cs;
    cs.frames = generate_session(recipe.profile);
    cs.recipe = std::move(recipe);
    out.push_back(std::move(cs));
  }
  return out;
}

SimProfile calming_profile() {
  SimProfile p;
  p.session_duration_s = 600.0;

  ChannelProfile& pressure = p.channels[channel_index(Channel::pressure_raw)];
  pressure.baseline = 12600.0;
  pressure.drift_amplitude = -3000.0;  // light touch at first, firming up
  pressure.drift_tau_s = 240.0;
  pressure.noise_sigma0 = 600.0;
  pressure.noise_floor_fraction = 0.3;
  pressure.noise_tau_s = 240.0;
  pressure.sample_period_ms = 100;  // 10 SPS converter rate

  ChannelProfile& audio = p.channels[channel_index(Channel::audio_rms)];
  audio.baseline = 0.08;
  audio.drift_amplitude = 0.25;  // noisy start, settling down
  audio.drift_tau_s = 240.0;
  audio.noise_sigma0 = 0.04;
  audio.noise_floor_fraction = 0.3;
  audio.noise_tau_s = 240.0;
  audio.sample_period_ms = 100;

  ChannelProfile& hr = p.channels[channel_index(Channel::heart_rate)];
  hr.baseline = 68.0;
  hr.drift_amplitude = 18.0;
  hr.drift_tau_s = 300.0;
  hr.noise_sigma0 = 1.5;
  hr.noise_floor_fraction = 0.5;
  hr.noise_tau_s = 300.0;
  hr.sample_period_ms = 5000;

  ChannelProfile& rr = p.channels[channel_index(Channel::respiratory_rate)];
  rr.baseline = 14.0;
  rr.drift_amplitude = 6.0;
  rr.drift_tau_s = 300.0;
  rr.noise_sigma0 = 0.8;
  rr.noise_floor_fraction = 0.5;
  rr.noise_tau_s = 300.0;
  rr.sample_period_ms = 15000;

  return p;
}

SimProfile agitated_profile() {
  SimProfile p = calming_profile();
  for (auto& cp : p.channels) cp.drift_amplitude = -cp.drift_amplitude;
  return p;
}

CohortSpec calming_cohort(int n_sessions, uint64_t seed) {
  CohortSpec spec;
  spec.n_sessions = n_sessions;
  spec.base_profile = calming_profile();
  spec.seed = seed;
  spec.base_profile.seed = seed;
  // Across sessions: pressure firms up, ambient noise quiets down.
  spec.baseline_slope_per_session[channel_index(Channel::pressure_raw)] = 60.0;
  spec.baseline_slope_per_session[channel_index(Channel::audio_rms)] = -0.004;
  spec.baseline_jitter_sigma[channel_index(Channel::pressure_raw)] = 150.0;
  spec.baseline_jitter_sigma[channel_index(Channel::audio_rms)] = 0.01;
  spec.baseline_jitter_sigma[channel_index(Channel::heart_rate)] = 1.0;
  spec.baseline_jitter_sigma[channel_index(Channel::respiratory_rate)] = 0.5;
  return spec;
}

CohortSpec agitated_cohort(int n_sessions, uint64_t seed) {
  CohortSpec spec = calming_cohort(n_sessions, seed);
  spec.base_profile = agitated_profile();
  spec.base_profile.seed = seed;
  for (auto& slope : spec.baseline_slope_per_session) slope = -slope;
  return spec;
}

std::optional<SimProfile> preset_profile(std::string_view name) {
  if (name == "calming") return calming_profile();
  if (name == "agitated") return agitated_profile();
  return std::nullopt;
}

std::optional<CohortSpec> preset_cohort(std::string_view name, int n_sessions, uint64_t seed) {
  if (name == "calming") return calming_cohort(n_sessions, seed);
  if (name == "agitated") return agitated_cohort(n_sessions, seed);
  return std::nullopt;
}

}  // namespace emoc
