#include "rtpc/respiration.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "rtpc/error.hpp"

namespace rtpc::resp {
namespace {

struct Extremum {
  std::size_t index = 0;
  bool peak = false;
};

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

// Hysteresis scan: an extremum is confirmed once the signal retreats from it
// by at least `swing`.
std::vector<Extremum> zigzag(const std::vector<double>& x, double swing) {
  enum class Dir { None, Up, Down };
  std::vector<Extremum> out;
  Dir dir = Dir::None;
  double hi = x.front();
  double lo = x.front();
  std::size_t hi_i = 0;
  std::size_t lo_i = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double v = x[i];
    switch (dir) {
      case Dir::None:
        if (v > hi) hi = v, hi_i = i;
        if (v < lo) lo = v, lo_i = i;
        if (hi - lo >= swing) {
          if (hi_i > lo_i) {
            out.push_back({lo_i, false});
            dir = Dir::Up;
          } else {
            out.push_back({hi_i, true});
            dir = Dir::Down;
          }
        }
        break;
      case Dir::Up:
        if (v > hi) {
          hi = v, hi_i = i;
        } else if (hi - v >= swing) {
          out.push_back({hi_i, true});
          dir = Dir::Down;
          lo = v, lo_i = i;
        }
        break;
      case Dir::Down:
        if (v < lo) {
          lo = v, lo_i = i;
        } else if (v - lo >= swing) {
          out.push_back({lo_i, false});
          dir = Dir::Up;
          hi = v, hi_i = i;
        }
        break;
    }
  }
  return out;
}

// Drops the weaker of two same-type extrema closer than `min_gap` samples,
// together with the shallower of its two neighbours so alternation survives.
void enforce_separation(std::vector<Extremum>& ext, const std::vector<double>& x, double min_gap) {
  auto weaker = [&](const Extremum& a, const Extremum& b) {
    // true when a is weaker than b
    return a.peak ? x[a.index] < x[b.index] : x[a.index] > x[b.index];
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i + 2 < ext.size(); ++i) {
      if (static_cast<double>(ext[i + 2].index - ext[i].index) >= min_gap) continue;
      const std::size_t w = weaker(ext[i], ext[i + 2]) ? i : i + 2;
      if (w > 0 && w + 1 < ext.size()) {
        const std::size_t drop = weaker(ext[w - 1], ext[w + 1]) ? w - 1 : w + 1;
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(std::max(w, drop)));
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(std::min(w, drop)));
      } else {
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(w));
      }
      changed = true;
      break;
    }
  }
}

double refine(const std::vector<double>& x, std::size_t i) {
  if (i == 0 || i + 1 >= x.size()) return static_cast<double>(i);
  const double a = x[i - 1];
  const double b = x[i];
  const double c = x[i + 1];
  const double curvature = a - 2.0 * b + c;
  if (curvature == 0.0) return static_cast<double>(i);
  return static_cast<double>(i) + std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
}

}  // namespace

std::string_view to_string(Phase p) { return p == Phase::In ? "IN" : "EX"; }

std::string_view to_string(PhaseLabel p) {
  switch (p) {
    case PhaseLabel::In: return "IN";
    case PhaseLabel::Ex: return "EX";
    case PhaseLabel::Unlabeled: return "UNLABELED";
  }
  return "UNLABELED";
}

RespIntervals::RespIntervals(std::vector<RespInterval> intervals, double mean_period_s)
    : base_(std::move(intervals)), mean_period_s_(mean_period_s) {
  if (base_.empty()) fail(ErrorCode::NoBreathsDetected, "no respiratory intervals");
  if (!(mean_period_s_ > 0.0) || !std::isfinite(mean_period_s_)) {
    fail(ErrorCode::InvalidArgument, "mean respiratory period must be positive");
  }
  for (std::size_t i = 0; i < base_.size(); ++i) {
    const auto& iv = base_[i];
    const double d = iv.end_s - iv.start_s;
    if (!(d > 0.0)) fail(ErrorCode::InvalidArgument, "respiratory interval with non-positive duration");
    if (!(d > 0.3 * mean_period_s_) || !(d < 3.0 * mean_period_s_)) {
      fail(ErrorCode::InvalidArgument, "respiratory interval " + std::to_string(i) + " lasts " +
                                           std::to_string(d) + " s, outside (0.3, 3) x mean period");
    }
    if (i > 0) {
      if (base_[i - 1].end_s != iv.start_s) fail(ErrorCode::InvalidArgument, "respiratory intervals do not abut");
      if (base_[i - 1].phase == iv.phase) fail(ErrorCode::NonAlternating, "respiratory phases do not alternate");
    }
  }
  ends_.reserve(base_.size());
  for (const auto& iv : base_) ends_.push_back(iv.end_s);
}

RespInterval RespIntervals::operator[](std::size_t i) const {
  RespInterval iv = base_[i];
  iv.start_s += delay_s_;
  iv.end_s += delay_s_;
  return iv;
}

std::vector<RespInterval> RespIntervals::intervals() const {
  std::vector<RespInterval> out;
  out.reserve(base_.size());
  for (std::size_t i = 0; i < base_.size(); ++i) out.push_back((*this)[i]);
  return out;
}

PhaseLabel RespIntervals::phase_at(double t) const {
  if (base_.empty()) return PhaseLabel::Unlabeled;
  const auto it = std::partition_point(ends_.begin(), ends_.end(),
                                       [&](double end) { return end + delay_s_ <= t; });
  if (it == ends_.end()) return PhaseLabel::Unlabeled;
  const auto& iv = base_[static_cast<std::size_t>(it - ends_.begin())];
  if (t < iv.start_s + delay_s_) return PhaseLabel::Unlabeled;
  return iv.phase == Phase::In ? PhaseLabel::In : PhaseLabel::Ex;
}

RespIntervals detect_resp_intervals(const SampledSignal& resp, const DetectionParams& params) {
  resp.validate();
  if (resp.kind != SignalKind::Respiration) {
    fail(ErrorCode::InvalidArgument, "interval detection needs a respiration signal");
  }
  if (!(params.smooth_window_s >= 0.0) || !(params.min_separation_s >= 0.0) ||
      !(params.prominence_fraction > 0.0)) {
    fail(ErrorCode::InvalidArgument, "invalid respiration detection parameters");
  }
  if (resp.duration() < 2.0 * params.min_separation_s) {
    fail(ErrorCode::TooShort, "belt signal shorter than twice the minimum breath separation");
  }

  std::vector<double> x = resp.values;
  if (params.invert) {
    for (double& v : x) v = -v;
  }
  auto window = static_cast<std::size_t>(std::max(1.0, std::round(params.smooth_window_s / resp.dt_s)));
  if (window % 2 == 0) ++window;
  const std::vector<double> smooth = moving_average(x, window);

  const auto [lo_it, hi_it] = std::minmax_element(smooth.begin(), smooth.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) fail(ErrorCode::NoBreathsDetected, "belt signal is constant");

  const double swing = params.prominence_fraction * range;
  std::vector<Extremum> ext = zigzag(smooth, swing);
  // The scan confirms only the right flank of the first extremum; a turning
  // point cut by the record start is not a breath boundary.
  if (!ext.empty()) {
    const auto& e = ext.front();
    const auto head = std::span(smooth).first(e.index + 1);
    const auto [lo, hi] = std::minmax_element(head.begin(), head.end());
    if ((e.peak ? smooth[e.index] - *lo : *hi - smooth[e.index]) < swing) ext.erase(ext.begin());
  }
  std::erase_if(ext, [&](const Extremum& e) { return e.index + 1 == smooth.size(); });
  enforce_separation(ext, smooth, params.min_separation_s / resp.dt_s);

  const auto n_peaks = std::count_if(ext.begin(), ext.end(), [](const Extremum& e) { return e.peak; });
  const auto n_troughs = static_cast<std::ptrdiff_t>(ext.size()) - n_peaks;
  if (n_peaks < 1 || n_troughs < 1) {
    fail(ErrorCode::NoBreathsDetected, "need at least one belt peak and one trough");
  }

  std::vector<double> times(ext.size());
  for (std::size_t i = 0; i < ext.size(); ++i) times[i] = resp.t0_s + refine(smooth, ext[i].index) * resp.dt_s;

  std::vector<RespInterval> intervals;
  for (std::size_t i = 0; i + 1 < ext.size(); ++i) {
    if (ext[i].peak == ext[i + 1].peak) fail(ErrorCode::NonAlternating, "belt extrema do not alternate");
    intervals.push_back({times[i], times[i + 1], ext[i].peak ? Phase::Ex : Phase::In});
  }

  auto mean_spacing = [&](bool peaks) {
    double first = 0.0;
    double last = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ext.size(); ++i) {
      if (ext[i].peak != peaks) continue;
      if (count == 0) first = times[i];
      last = times[i];
      ++count;
    }
    return count >= 2 ? (last - first) / static_cast<double>(count - 1) : 0.0;
  };
  double mean_period = mean_spacing(false);
  if (mean_period == 0.0) mean_period = mean_spacing(true);
  if (mean_period == 0.0) mean_period = 2.0 * (intervals.front().end_s - intervals.front().start_s);
  return RespIntervals(std::move(intervals), mean_period);
}

RespIntervals shift_intervals(const RespIntervals& intervals, double delay_s) {
  if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) fail(ErrorCode::InvalidArgument, "delay must be >= 0");
  RespIntervals out = intervals;
  out.delay_s_ = intervals.delay_s_ + delay_s;
  return out;
}

std::vector<PhaseLabel> label_cycles(const std::vector<cycles::CCFC>& cycles,
                                     const RespIntervals& intervals) {
  std::vector<PhaseLabel> labels;
  labels.reserve(cycles.size());
  for (const auto& c : cycles) labels.push_back(intervals.phase_at(c.boundary.midpoint_s()));
  return labels;
}

}  // namespace rtpc::resp
