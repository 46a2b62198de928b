#include <doctest.h>

#include <cmath>
#include <set>

#include "emotioncarrier/simulator.hpp"

using namespace emoc;

TEST_CASE("noiseless zero-drift profile emits the baseline everywhere") {
  SimProfile p = calming_profile();
  p.session_duration_s = 30.0;
  for (auto& cp : p.channels) {
    cp.noise_sigma0 = 0.0;
    cp.drift_amplitude = 0.0;
  }
  for (const auto& f : generate_session(p)) {
    const auto& cp = p.channels[channel_index(f.channel)];
    CHECK(f.value == doctest::Approx(cp.baseline).epsilon(1e-12));
  }
}

TEST_CASE("noiseless drift follows the closed form") {
  SimProfile p = calming_profile();
  p.session_duration_s = 300.0;
  for (auto& cp : p.channels) cp.noise_sigma0 = 0.0;

  // heart_rate: baseline 68, amplitude +18, tau 300
  const auto frames = generate_session(p);
  bool checked_start = false, checked_tau = false;
  for (const auto& f : frames) {
    if (f.channel != Channel::heart_rate) continue;
    const int64_t t_ms = f.timestamp_ms - p.start_ts_ms;
    const double t_s = static_cast<double>(t_ms) / 1000.0;
    const double expected = 68.0 + 18.0 * std::exp(-t_s / 300.0);
    CHECK(std::abs(f.value - expected) <= 1e-9);
    if (t_ms == 0) {
      CHECK(f.value == doctest::Approx(86.0));
      checked_start = true;
    }
    if (t_ms == 300000) {
      CHECK(f.value == doctest::Approx(68.0 + 18.0 / std::numbers::e));  // ~74.622
      checked_tau = true;
    }
  }
  CHECK(checked_start);
  CHECK(checked_tau);
}

TEST_CASE("same seed reproduces the sequence, different seeds diverge") {
  SimProfile p = calming_profile();
  p.session_duration_s = 20.0;
  p.seed = 123;
  const auto a = generate_session(p);
  const auto b = generate_session(p);
  CHECK(a == b);

  p.seed = 124;
  const auto c = generate_session(p);
  REQUIRE(a.size() == c.size());
  bool any_difference = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].value != c[i].value) {
      any_difference = true;
      break;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("per-channel timestamps advance by exactly the sample period") {
  SimProfile p = calming_profile();
  p.session_duration_s = 45.0;
  std::array<int64_t, kChannelCount> last{-1, -1, -1, -1};
  for (const auto& f : generate_session(p)) {
    const int i = channel_index(f.channel);
    if (last[i] >= 0) {
      CHECK(f.timestamp_ms - last[i] == p.channels[i].sample_period_ms);
    }
    last[i] = f.timestamp_ms;
  }
}

TEST_CASE("every generated frame passes wire validation") {
  SimProfile p = agitated_profile();  // exercises clamping at audio_rms 0
  p.session_duration_s = 120.0;
  p.seed = 9;
  size_t clamped = 0;
  for (const auto& f : generate_session(p)) {
    CHECK_FALSE(frame_violation(f).has_value());
    CHECK(encode_frame(f).ok());
    if (f.channel == Channel::audio_rms && f.value == 0.0) ++clamped;
  }
  CHECK(clamped > 0);  // the negated audio drift starts below zero
}

TEST_CASE("frames are globally timestamp-ordered with monotonic per-channel seq") {
  SimProfile p = calming_profile();
  p.session_duration_s = 15.0;
  int64_t last_ts = -1;
  std::array<std::optional<uint64_t>, kChannelCount> last_seq;
  for (const auto& f : generate_session(p)) {
    CHECK(f.timestamp_ms >= last_ts);
    last_ts = f.timestamp_ms;
    const int i = channel_index(f.channel);
    REQUIRE(f.seq.has_value());
    if (last_seq[i]) CHECK(*f.seq == *last_seq[i] + 1);
    last_seq[i] = f.seq;
  }
}

TEST_CASE("cohort baselines follow slope and stagger deterministically") {
  CohortSpec spec = calming_cohort(30, 7);
  spec.baseline_jitter_sigma = {};  // isolate the slope
  const auto recipes = plan_cohort(spec);
  REQUIRE(recipes.size() == 30);

  const int audio = channel_index(Channel::audio_rms);
  const int pressure = channel_index(Channel::pressure_raw);
  CHECK(recipes[0].profile.channels[audio].baseline == doctest::Approx(0.08));
  CHECK(recipes[29].profile.channels[audio].baseline ==
        doctest::Approx(0.08 - 0.004 * 29));
  CHECK(recipes[29].profile.channels[pressure].baseline ==
        doctest::Approx(12600.0 + 60.0 * 29));
  // documented arithmetic example: base 0.20, slope -0.004, session 29
  CohortSpec example = spec;
  example.base_profile.channels[audio].baseline = 0.20;
  CHECK(plan_cohort(example)[29].profile.channels[audio].baseline == doctest::Approx(0.084));

  for (int k = 1; k < 30; ++k) {
    CHECK(recipes[k].profile.start_ts_ms - recipes[k - 1].profile.start_ts_ms ==
          spec.session_stagger_ms);
    CHECK(recipes[k].profile.seed != recipes[k - 1].profile.seed);
  }

  // zero slopes and jitter -> identical effective channel profiles
  CohortSpec flat = spec;
  flat.baseline_slope_per_session = {};
  const auto flat_recipes = plan_cohort(flat);
  for (const auto& r : flat_recipes) {
    for (Channel c : all_channels()) {
      CHECK(r.profile.channels[channel_index(c)].baseline ==
            flat.base_profile.channels[channel_index(c)].baseline);
    }
  }

  // determinism of the full plan
  const auto again = plan_cohort(spec);
  for (size_t k = 0; k < recipes.size(); ++k) {
    CHECK(recipes[k].profile.seed == again[k].profile.seed);
    CHECK(recipes[k].profile.channels[audio].baseline ==
          again[k].profile.channels[audio].baseline);
  }
}

TEST_CASE("invalid profiles are rejected at construction") {
  SimProfile p = calming_profile();
  p.session_duration_s = 0.0;
  CHECK_THROWS_AS((void)generate_session(p), std::invalid_argument);

  p = calming_profile();
  p.channels[0].drift_tau_s = -1.0;
  CHECK_THROWS_AS((void)generate_session(p), std::invalid_argument);

  CohortSpec spec = calming_cohort(0, 1);
  CHECK_THROWS_AS((void)plan_cohort(spec), std::invalid_argument);
}

TEST_CASE("presets resolve by name") {
  CHECK(preset_profile("calming").has_value());
  CHECK(preset_profile("agitated").has_value());
  CHECK_FALSE(preset_profile("serene").has_value());
  const auto calm = preset_profile("calming");
  const auto agitated = preset_profile("agitated");
  for (Channel c : all_channels()) {
    CHECK(calm->channels[channel_index(c)].drift_amplitude ==
          -agitated->channels[channel_index(c)].drift_amplitude);
  }
}
