#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emotioncarrier/result.hpp"
#include "emotioncarrier/session.hpp"

namespace emoc {

struct AlignOptions {
  int64_t grid_step_ms = 1000;  // > 0
  // Per channel: how far a grid point may sit from the sample(s) that produce
  // its value before it is marked missing. 2-3x the nominal sample period.
  std::array<int64_t, kChannelCount> max_gap_ms = {5000, 5000, 30000, 30000};
};

// All channels resampled onto one uniform grid. Pressure is calibrated to
// gram-force; dense channels (pressure, audio) are linearly interpolated,
// sparse ones (heart rate, respiratory rate) hold the last reported value.
// Cells without nearby data are nullopt, never NaN.
struct AlignedTimeline {
  std::string session_id;
  int64_t grid_start_ms = 0;
  int64_t grid_step_ms = 1000;
  int64_t span_ms = 0;  // session end - start (may exceed the last grid point)
  std::array<std::vector<std::optional<double>>, kChannelCount> cells;

  size_t grid_size() const { return cells[0].size(); }
  int64_t grid_ts(size_t i) const {
    return grid_start_ms + static_cast<int64_t>(i) * grid_step_ms;
  }
  const std::vector<std::optional<double>>& channel_cells(Channel c) const {
    return cells[channel_index(c)];
  }
};

enum class AlignErrorKind { degenerate_session, bad_options };
struct AlignError {
  AlignErrorKind kind;
  std::string detail;
};

// Grid starts at session.start_ts_ms and has floor((end-start)/step)+1 points.
// An empty non-pressure channel is not an error; its column is all missing.
Result<AlignedTimeline, AlignError> align(const Session& session,
                                          const CalibrationProfile& calibration,
                                          const AlignOptions& opts = {});

// Exact linear interpolation between bracketing samples; exact at sample
// timestamps; nullopt outside the sample span.
std::optional<double> interpolate_linear(const ChannelSeries& series, int64_t t_ms);

}  // namespace emoc
