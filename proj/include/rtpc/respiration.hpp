#pragma once

#include <cstddef>
#include <vector>

#include "rtpc/cardiac_cycles.hpp"
#include "rtpc/types.hpp"

namespace rtpc::resp {

enum class Phase { In, Ex };
enum class PhaseLabel { In, Ex, Unlabeled };

std::string_view to_string(Phase p);
std::string_view to_string(PhaseLabel p);

struct RespInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  Phase phase = Phase::In;

  bool operator==(const RespInterval&) const = default;
};

/// Alternating inspiration/expiration intervals.
///
/// Boundaries are held unshifted together with an accumulated delay so that
/// shifting composes exactly: shift(shift(I, a), b) == shift(I, a + b).
class RespIntervals {
 public:
  RespIntervals() = default;
  /// Validates abutment, strict alternation and the duration bounds.
  RespIntervals(std::vector<RespInterval> intervals, double mean_period_s);

  [[nodiscard]] std::size_t size() const { return base_.size(); }
  [[nodiscard]] bool empty() const { return base_.empty(); }
  [[nodiscard]] RespInterval operator[](std::size_t i) const;
  [[nodiscard]] std::vector<RespInterval> intervals() const;
  [[nodiscard]] double mean_period_s() const { return mean_period_s_; }
  [[nodiscard]] double delay_s() const { return delay_s_; }
  [[nodiscard]] double span_start_s() const { return base_.front().start_s + delay_s_; }
  [[nodiscard]] double span_end_s() const { return base_.back().end_s + delay_s_; }

  /// Phase at time t (half-open intervals); Unlabeled outside the span.
  [[nodiscard]] PhaseLabel phase_at(double t) const;

  friend RespIntervals shift_intervals(const RespIntervals& intervals, double delay_s);

  bool operator==(const RespIntervals&) const = default;

 private:
  std::vector<RespInterval> base_;
  std::vector<double> ends_;  // base_ end times, for lookup
  double mean_period_s_ = 0.0;
  double delay_s_ = 0.0;
};

struct DetectionParams {
  double smooth_window_s = 0.5;
  double min_separation_s = 1.5;
  double prominence_fraction = 0.2;
  bool invert = false;  // belt falls on inhalation
};

/// Trough->peak is inspiration, peak->trough expiration (rising belt =
/// inhalation unless `invert`). Extrema come from a hysteresis (zig-zag)
/// scan of the smoothed belt with swing >= prominence_fraction * range,
/// refined by parabolic interpolation.
RespIntervals detect_resp_intervals(const SampledSignal& resp, const DetectionParams& params = {});

/// Moves every boundary by +delay_s (positive = flow lags the belt).
RespIntervals shift_intervals(const RespIntervals& intervals, double delay_s);

/// Labels each cycle by the phase containing its temporal midpoint.
std::vector<PhaseLabel> label_cycles(const std::vector<cycles::CCFC>& cycles,
                                     const RespIntervals& intervals);

}  // namespace rtpc::resp
