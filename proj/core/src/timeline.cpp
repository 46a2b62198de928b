#include "emotioncarrier/timeline.hpp"

#include <algorithm>
#include <cmath>

namespace emoc {

namespace {

bool is_dense(Channel c) {
  return c == Channel::pressure_raw || c == Channel::audio_rms;
}

// Linear interpolation sweep: for each grid point, find the bracketing pair
// and interpolate when both neighbours are within max_gap.
void fill_dense(const std::vector<int64_t>& ts, const std::vector<double>& vals,
                const AlignedTimeline& tl, int64_t max_gap,
                std::vector<std::optional<double>>& out) {
  if (ts.empty()) return;
  size_t hi = 0;  // first sample with timestamp >= grid point
  for (size_t i = 0; i < out.size(); ++i) {
    const int64_t t = tl.grid_ts(i);
    if (t < ts.front() || t > ts.back()) continue;  // no extrapolation
    while (hi < ts.size() && ts[hi] < t) ++hi;
    if (ts[hi] == t) {
      out[i] = vals[hi];
      continue;
    }
    const size_t lo = hi - 1;  // ts[lo] < t < ts[hi]
    const int64_t left = t - ts[lo];
    const int64_t right = ts[hi] - t;
    if (std::min(left, right) > max_gap) continue;
    const double alpha = static_cast<double>(left) / static_cast<double>(ts[hi] - ts[lo]);
    out[i] = vals[lo] + (vals[hi] - vals[lo]) * alpha;
  }
}

// Hold-last-value sweep for reported (not continuously sampled) vitals.
void fill_sparse(const std::vector<int64_t>& ts, const std::vector<double>& vals,
                 const AlignedTimeline& tl, int64_t max_gap,
                 std::vector<std::optional<double>>& out) {
  if (ts.empty()) return;
  size_t last = 0;
  bool has_last = false;
  size_t next = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    const int64_t t = tl.grid_ts(i);
    while (next < ts.size() && ts[next] <= t) {
      last = next++;
      has_last = true;
    }
    if (!has_last) continue;              // before the first report
    if (t - ts[last] > max_gap) continue; // report has gone stale
    out[i] = vals[last];
  }
}

}  // namespace

Result<AlignedTimeline, AlignError> align(const Session& session,
                                          const CalibrationProfile& calibration,
                                          const AlignOptions& opts) {
  if (opts.grid_step_ms <= 0) {
    return AlignError{AlignErrorKind::bad_options, "grid_step_ms must be > 0"};
  }
  for (int64_t gap : opts.max_gap_ms) {
    if (gap < 0) return AlignError{AlignErrorKind::bad_options, "max_gap_ms must be >= 0"};
  }
  if (session.series(Channel::pressure_raw).empty()) {
    return AlignError{AlignErrorKind::degenerate_session, "pressure series is empty"};
  }
  if (session.end_ts_ms < session.start_ts_ms) {
    return AlignError{AlignErrorKind::degenerate_session, "end before start"};
  }

  AlignedTimeline tl;
  tl.session_id = session.session_id;
  tl.grid_start_ms = session.start_ts_ms;
  tl.grid_step_ms = opts.grid_step_ms;
  tl.span_ms = session.end_ts_ms - session.start_ts_ms;
  const size_t n = static_cast<size_t>(tl.span_ms / opts.grid_step_ms) + 1;
  for (auto& col : tl.cells) col.assign(n, std::nullopt);

  for (Channel c : all_channels()) {
    const ChannelSeries& series = session.series(c);
    const int64_t max_gap = opts.max_gap_ms[channel_index(c)];
    auto& out = tl.cells[channel_index(c)];
    if (c == Channel::pressure_raw) {
      std::vector<double> gf(series.values.size());
      for (size_t i = 0; i < series.values.size(); ++i) {
        gf[i] = calibrate_pressure(series.values[i], calibration);
      }
      fill_dense(series.timestamps_ms, gf, tl, max_gap, out);
    } else if (is_dense(c)) {
      fill_dense(series.timestamps_ms, series.values, tl, max_gap, out);
    } else {
      fill_sparse(series.timestamps_ms, series.values, tl, max_gap, out);
    }
  }
  return tl;
}

std::optional<double> interpolate_linear(const ChannelSeries& series, int64_t t_ms) {
  const auto& ts = series.timestamps_ms;
  if (ts.empty() || t_ms < ts.front() || t_ms > ts.back()) return std::nullopt;
  const auto it = std::lower_bound(ts.begin(), ts.end(), t_ms);
  const size_t hi = static_cast<size_t>(it - ts.begin());
  if (ts[hi] == t_ms) return series.values[hi];
  const size_t lo = hi - 1;
  const double alpha =
      static_cast<double>(t_ms - ts[lo]) / static_cast<double>(ts[hi] - ts[lo]);
  return series.values[lo] + (series.values[hi] - series.values[lo]) * alpha;
}

}  // namespace emoc
