#include "emotioncarrier/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emoc {

std::string_view stat_error_name(StatErrorKind kind) {
  switch (kind) {
    case StatErrorKind::too_few_points: return "too_few_points";
    case StatErrorKind::degenerate_variance: return "degenerate_variance";
    case StatErrorKind::degenerate_time: return "degenerate_time";
    case StatErrorKind::window_too_large: return "window_too_large";
    case StatErrorKind::too_few_windows: return "too_few_windows";
    case StatErrorKind::too_few_sessions: return "too_few_sessions";
    case StatErrorKind::degenerate_session: return "degenerate_session";
    case StatErrorKind::unknown_scalar: return "unknown_scalar";
  }
  return "?";
}

Result<double, StatError> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const size_t n = x.size();
  if (n < 2) return StatError{StatErrorKind::too_few_points};

  double mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return StatError{StatErrorKind::degenerate_variance};
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Result<double, StatError> pearson_cells(CellSpan x, CellSpan y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  std::vector<double> xs, ys;
  xs.reserve(x.size());
  ys.reserve(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    }
  }
  return pearson(xs, ys);
}

Result<LinearFit, StatError> linreg(std::span<const double> t_s, std::span<const double> y) {
  if (t_s.size() != y.size()) throw std::invalid_argument("linreg: length mismatch");
  const size_t n = t_s.size();
  if (n < 2) return StatError{StatErrorKind::too_few_points};

  double mean_t = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_t += t_s[i];
    mean_y += y[i];
  }
  mean_t /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dt = t_s[i] - mean_t;
    stt += dt * dt;
    sty += dt * (y[i] - mean_y);
  }
  if (stt == 0.0) return StatError{StatErrorKind::degenerate_time};
  const double slope_per_s = sty / stt;
  return LinearFit{slope_per_s * 60.0, mean_y - slope_per_s * mean_t};
}

Result<LinearFit, StatError> linreg_cells(std::span<const double> t_s, CellSpan y) {
  if (t_s.size() != y.size()) throw std::invalid_argument("linreg: length mismatch");
  std::vector<double> ts, ys;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      ts.push_back(t_s[i]);
      ys.push_back(*y[i]);
    }
  }
  return linreg(ts, ys);
}

namespace {

double window_std(const double* y, size_t window) {
  double mean = 0.0;
  for (size_t i = 0; i < window; ++i) mean += y[i];
  mean /= static_cast<double>(window);
  double ss = 0.0;
  for (size_t i = 0; i < window; ++i) {
    const double d = y[i] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(window - 1));
}

}  // namespace

Result<std::vector<double>, StatError> rolling_std(std::span<const double> y, size_t window) {
  if (window < 2) throw std::invalid_argument("rolling_std: window must be >= 2");
  if (window > y.size()) return StatError{StatErrorKind::window_too_large};
  std::vector<double> out;
  out.reserve(y.size() - window + 1);
  for (size_t i = 0; i + window <= y.size(); ++i) {
    out.push_back(window_std(y.data() + i, window));
  }
  return out;
}

Result<Cells, StatError> rolling_std_cells(CellSpan y, size_t window) {
  if (window < 2) throw std::invalid_argument("rolling_std: window must be >= 2");
  if (window > y.size()) return StatError{StatErrorKind::window_too_large};
  Cells out(y.size() - window + 1);
  std::vector<double> buf(window);
  for (size_t i = 0; i + window <= y.size(); ++i) {
    bool complete = true;
    for (size_t j = 0; j < window; ++j) {
      if (!y[i + j]) {
        complete = false;
        break;
      }
      buf[j] = *y[i + j];
    }
    if (complete) out[i] = window_std(buf.data(), window);
  }
  return out;
}

Result<double, StatError> stabilization_index(CellSpan y, size_t window) {
  auto rolled = rolling_std_cells(y, window);
  if (!rolled.ok()) return StatError{StatErrorKind::too_few_windows};
  const Cells& w = rolled.value();
  const size_t m = w.size();
  if (m < 4) return StatError{StatErrorKind::too_few_windows};
  const size_t quartile = std::max<size_t>(1, m / 4);

  const auto quartile_mean = [&w](size_t begin, size_t end) -> std::optional<double> {
    double sum = 0.0;
    size_t count = 0;
    for (size_t i = begin; i < end; ++i) {
      if (w[i]) {
        sum += *w[i];
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };

  const auto early = quartile_mean(0, quartile);
  const auto late = quartile_mean(m - quartile, m);
  if (!early || !late) return StatError{StatErrorKind::too_few_windows};
  if (*early < kStabilizationEpsilon && *late < kStabilizationEpsilon) return 1.0;
  return *late / std::max(*early, kStabilizationEpsilon);
}

Result<double, StatError> stabilization_index(std::span<const double> y, size_t window) {
  Cells cells(y.size());
  for (size_t i = 0; i < y.size(); ++i) cells[i] = y[i];
  return stabilization_index(CellSpan(cells), window);
}

Result<SessionMetrics, StatError> session_metrics(const AlignedTimeline& tl,
                                                  const MetricsOptions& opts) {
  SessionMetrics m;
  m.session_id = tl.session_id;
  m.duration_s = static_cast<double>(tl.span_ms) / 1000.0;

  const size_t n = tl.grid_size();
  std::vector<double> elapsed_s(n);
  for (size_t i = 0; i < n; ++i) {
    elapsed_s[i] = static_cast<double>(tl.grid_ts(i) - tl.grid_start_ms) / 1000.0;
  }

  for (Channel c : all_channels()) {
    const auto& cells = tl.channel_cells(c);
    std::vector<double> present;
    present.reserve(n);
    for (const auto& cell : cells) {
      if (cell) present.push_back(*cell);
    }

    ChannelStats stats;
    stats.samples = present.size();
    stats.missing_fraction =
        n == 0 ? 1.0 : static_cast<double>(n - present.size()) / static_cast<double>(n);

    if (present.size() < 2) {
      m.channels[channel_index(c)] = std::nullopt;
      continue;
    }

    double mean = 0.0;
    for (double v : present) mean += v;
    mean /= static_cast<double>(present.size());
    double ss = 0.0;
    for (double v : present) ss += (v - mean) * (v - mean);
    stats.mean = mean;
    stats.stddev = std::sqrt(ss / static_cast<double>(present.size() - 1));

    if (auto fit = linreg_cells(elapsed_s, cells); fit.ok()) {
      stats.slope_per_min = fit.value().slope_per_min;
    }
    {
      Cells time_cells(n);
      for (size_t i = 0; i < n; ++i) time_cells[i] = elapsed_s[i];
      if (auto r = pearson_cells(time_cells, cells); r.ok()) stats.time_corr = r.value();
    }
    if (auto stab = stabilization_index(CellSpan(cells), opts.rolling_window); stab.ok()) {
      stats.stabilization = stab.value();
    }
    m.channels[channel_index(c)] = std::move(stats);
  }

  if (!m.channel(Channel::pressure_raw).has_value()) {
    return StatError{StatErrorKind::degenerate_session};
  }
  return m;
}

std::string_view metric_channel_name(Channel c) {
  switch (c) {
    case Channel::pressure_raw: return "pressure_gf";  // calibrated on the grid
    case Channel::audio_rms: return "audio_rms";
    case Channel::heart_rate: return "heart_rate";
    case Channel::respiratory_rate: return "respiratory_rate";
  }
  return "?";
}

std::optional<Channel> metric_channel_from_name(std::string_view name) {
  for (Channel c : all_channels()) {
    if (metric_channel_name(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<double> metric_scalar(const SessionMetrics& m, std::string_view name) {
  if (name == "duration_s") return m.duration_s;
  const size_t dot = name.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  const auto channel = metric_channel_from_name(name.substr(0, dot));
  if (!channel) return std::nullopt;
  const auto& stats = m.channel(*channel);
  const std::string_view field = name.substr(dot + 1);
  if (field == "missing_fraction") {
    return stats ? std::optional<double>(stats->missing_fraction) : std::optional<double>(1.0);
  }
  if (!stats) return std::nullopt;
  if (field == "mean") return stats->mean;
  if (field == "std") return stats->stddev;
  if (field == "slope_per_min") return stats->slope_per_min;
  if (field == "time_corr") return stats->time_corr;
  if (field == "stabilization") return stats->stabilization;
  return std::nullopt;
}

Result<CohortTrend, StatError> cohort_trend(std::span<const SessionMetrics> sessions,
                                            std::string_view scalar_name) {
  CohortTrend trend;
  trend.scalar_name = std::string(scalar_name);
  for (size_t k = 0; k < sessions.size(); ++k) {
    if (auto v = metric_scalar(sessions[k], scalar_name)) {
      trend.session_indices.push_back(static_cast<int>(k));
      trend.scalar_values.push_back(*v);
    }
  }
  if (trend.scalar_values.size() < 2) return StatError{StatErrorKind::too_few_sessions};

  std::vector<double> idx(trend.session_indices.begin(), trend.session_indices.end());
  auto r = pearson(idx, trend.scalar_values);
  if (!r.ok()) return r.error();
  trend.cross_session_r = r.value();

  auto fit = linreg(idx, trend.scalar_values);  // "seconds" here are session indices
  if (!fit.ok()) return fit.error();
  trend.cross_session_slope = fit.value().slope_per_min / 60.0;  // undo per-minute scaling
  return trend;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::calming: return "calming";
    case Verdict::neutral: return "neutral";
    case Verdict::agitated: return "agitated";
  }
  return "?";
}

std::string_view rule_sign_name(RuleSign s) {
  switch (s) {
    case RuleSign::calming_side: return "calming";
    case RuleSign::neutral_band: return "neutral";
    case RuleSign::agitated_side: return "agitated";
  }
  return "?";
}

CalmingVerdict classify(const SessionMetrics& m, const ClassifyThresholds& thresholds) {
  CalmingVerdict v;

  const auto slope_rule = [&v](const std::optional<ChannelStats>& stats,
                               double min_magnitude) -> RuleSign {
    if (!stats || !stats->slope_per_min) {
      v.missing_inputs = true;
      return RuleSign::neutral_band;
    }
    if (*stats->slope_per_min < -min_magnitude) return RuleSign::calming_side;
    if (*stats->slope_per_min > min_magnitude) return RuleSign::agitated_side;
    return RuleSign::neutral_band;
  };

  v.hr_rule = slope_rule(m.channel(Channel::heart_rate), thresholds.hr_slope_min);
  v.rr_rule = slope_rule(m.channel(Channel::respiratory_rate), thresholds.rr_slope_min);

  const auto& audio = m.channel(Channel::audio_rms);
  if (!audio || !audio->stabilization) {
    v.missing_inputs = true;
  } else if (*audio->stabilization < thresholds.stab_max) {
    v.audio_rule = RuleSign::calming_side;
  } else if (*audio->stabilization > 1.0 / thresholds.stab_max) {
    v.audio_rule = RuleSign::agitated_side;
  }

  const RuleSign rules[] = {v.hr_rule, v.rr_rule, v.audio_rule};
  if (std::all_of(std::begin(rules), std::end(rules),
                  [](RuleSign s) { return s == RuleSign::calming_side; })) {
    v.verdict = Verdict::calming;
  } else if (std::all_of(std::begin(rules), std::end(rules),
                         [](RuleSign s) { return s == RuleSign::agitated_side; })) {
    v.verdict = Verdict::agitated;
  }
  return v;
}

}  // namespace emoc
