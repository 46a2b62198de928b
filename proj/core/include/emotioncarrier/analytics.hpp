#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emotioncarrier/result.hpp"
#include "emotioncarrier/timeline.hpp"

namespace emoc {

enum class StatErrorKind {
  too_few_points,
  degenerate_variance,
  degenerate_time,
  window_too_large,
  too_few_windows,
  too_few_sessions,
  degenerate_session,
  unknown_scalar,
};

struct StatError {
  StatErrorKind kind;
};

std::string_view stat_error_name(StatErrorKind kind);

using Cells = std::vector<std::optional<double>>;
using CellSpan = std::span<const std::optional<double>>;

// Sample Pearson correlation. Inputs must be equal length; pairs with a
// missing member are dropped first in the _cells variant.
Result<double, StatError> pearson(std::span<const double> x, std::span<const double> y);
Result<double, StatError> pearson_cells(CellSpan x, CellSpan y);

struct LinearFit {
  double slope_per_min = 0.0;  // least-squares slope, units per minute
  double intercept = 0.0;      // value at t = 0
};

// Ordinary least squares of y against time in seconds.
Result<LinearFit, StatError> linreg(std::span<const double> t_s, std::span<const double> y);
Result<LinearFit, StatError> linreg_cells(std::span<const double> t_s, CellSpan y);

// Sample standard deviation (divisor window-1) over each contiguous window;
// output length n - window + 1. Windows containing a missing cell yield a
// missing cell in the _cells variant.
Result<std::vector<double>, StatError> rolling_std(std::span<const double> y, size_t window);
Result<Cells, StatError> rolling_std_cells(CellSpan y, size_t window);

// Late-vs-early dispersion ratio: mean rolling std over the last quartile of
// windows divided by the mean over the first quartile. < 1 means the signal
// became steadier. Both quartiles near zero (< 1e-9) gives the neutral 1.0;
// a near-zero early quartile alone yields a large finite ratio.
Result<double, StatError> stabilization_index(CellSpan y, size_t window);
Result<double, StatError> stabilization_index(std::span<const double> y, size_t window);

inline constexpr double kStabilizationEpsilon = 1e-9;

// Per-channel session statistics over the aligned grid. Individual stats can
// be absent (e.g. correlation of a constant signal, stabilization of a short
// one) without the channel as a whole being missing.
struct ChannelStats {
  std::optional<double> mean;
  std::optional<double> stddev;          // sample std
  std::optional<double> slope_per_min;   // OLS vs elapsed time
  std::optional<double> time_corr;       // Pearson(elapsed time, value)
  std::optional<double> stabilization;
  double missing_fraction = 1.0;
  size_t samples = 0;  // non-missing cells
};

struct SessionMetrics {
  std::string session_id;
  double duration_s = 0.0;
  std::array<std::optional<ChannelStats>, kChannelCount> channels;

  const std::optional<ChannelStats>& channel(Channel c) const {
    return channels[channel_index(c)];
  }
};

struct MetricsOptions {
  size_t rolling_window = 30;  // grid points per rolling-std window
};

// Channels with fewer than two non-missing cells get a missing entry, not an
// error; a timeline whose pressure column is entirely missing is degenerate.
Result<SessionMetrics, StatError> session_metrics(const AlignedTimeline& tl,
                                                  const MetricsOptions& opts = {});

// Metric scalar names: "duration_s" or "<channel>.<stat>" where channel is
// one of pressure_gf, audio_rms, heart_rate, respiratory_rate and stat is one
// of mean, std, slope_per_min, time_corr, stabilization, missing_fraction.
std::string_view metric_channel_name(Channel c);
std::optional<Channel> metric_channel_from_name(std::string_view name);
std::optional<double> metric_scalar(const SessionMetrics& m, std::string_view name);

// One named scalar tracked across the session sequence.
struct CohortTrend {
  std::string scalar_name;
  std::vector<int> session_indices;
  std::vector<double> scalar_values;
  double cross_session_r = 0.0;      // Pearson(session index, scalar)
  double cross_session_slope = 0.0;  // OLS slope, units per session
};

Result<CohortTrend, StatError> cohort_trend(std::span<const SessionMetrics> sessions,
                                            std::string_view scalar_name);

enum class Verdict { calming, neutral, agitated };
enum class RuleSign { agitated_side = -1, neutral_band = 0, calming_side = 1 };

std::string_view verdict_name(Verdict v);
std::string_view rule_sign_name(RuleSign s);

struct ClassifyThresholds {
  double hr_slope_min = 0.2;   // bpm per minute
  double rr_slope_min = 0.05;  // breaths/min per minute
  double stab_max = 0.9;       // audio stabilization below this reads calming
};

// Three-rule decision table. Calming needs all rules on the calming side
// (hr slope < -hr_slope_min, rr slope < -rr_slope_min, audio stabilization
// < stab_max); agitated needs all three mirrored across neutral (slopes
// > +min, stabilization > 1/stab_max); anything else is neutral. A missing
// rule input leaves that rule neutral and flags the verdict.
struct CalmingVerdict {
  Verdict verdict = Verdict::neutral;
  RuleSign hr_rule = RuleSign::neutral_band;
  RuleSign rr_rule = RuleSign::neutral_band;
  RuleSign audio_rule = RuleSign::neutral_band;
  bool missing_inputs = false;
};

CalmingVerdict classify(const SessionMetrics& m, const ClassifyThresholds& thresholds = {});

}  // namespace emoc
