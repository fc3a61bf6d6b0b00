#include "rtpc/cardiac_cycles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "rtpc/error.hpp"

namespace rtpc::cycles {

double CycleParams::get(Parameter p) const {
  switch (p) {
    case Parameter::MeanFlow: return mean_flow_ml_min;
    case Parameter::StrokeVolume: return stroke_volume_ml;
    case Parameter::CardiacPeriod: return cardiac_period_s;
  }
  return 0.0;
}

SampledSignal resample(const SampledSignal& signal, int factor) {
  if (factor < 1) fail(ErrorCode::InvalidArgument, "upsampling factor must be >= 1");
  const std::size_t n = signal.size();
  if (n < 4) fail(ErrorCode::TooShort, "resampling needs at least 4 samples");
  if (factor == 1) return signal;

  const auto& y = signal.values;
  const double h = signal.dt_s;

  // Second derivatives with natural end conditions (Thomas algorithm).
  std::vector<double> m(n, 0.0);
  const std::size_t inner = n - 2;
  std::vector<double> c(inner, 0.0);
  std::vector<double> d(inner, 0.0);
  for (std::size_t k = 0; k < inner; ++k) {
    const std::size_t i = k + 1;
    const double rhs = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
    const double denom = 4.0 - (k > 0 ? c[k - 1] : 0.0);
    c[k] = 1.0 / denom;
    d[k] = (rhs - (k > 0 ? d[k - 1] : 0.0)) / denom;
  }
  for (std::size_t k = inner; k-- > 0;) {
    m[k + 1] = d[k] - (k + 1 < inner ? c[k] * m[k + 2] : 0.0);
  }

  SampledSignal out;
  out.kind = signal.kind;
  out.t0_s = signal.t0_s;
  out.dt_s = h / factor;
  out.values.resize((n - 1) * static_cast<std::size_t>(factor) + 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.values[i * factor] = y[i];
    for (int j = 1; j < factor; ++j) {
      const double s = h * j / factor;
      const double r = h - s;
      out.values[i * factor + j] = m[i] * r * r * r / (6.0 * h) + m[i + 1] * s * s * s / (6.0 * h) +
                                   (y[i] / h - m[i] * h / 6.0) * r +
                                   (y[i + 1] / h - m[i + 1] * h / 6.0) * s;
    }
  }
  out.values.back() = y.back();
  return out;
}

constexpr double kSubharmonicRatio = 0.8;

double estimate_period(const SampledSignal& signal, double band_lo_s, double band_hi_s) {
  const std::size_t n = signal.size();
  const double mean = std::accumulate(signal.values.begin(), signal.values.end(), 0.0) / n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = signal.values[i] - mean;
  const double energy = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  if (!(energy > 0.0)) fail(ErrorCode::NoCyclesFound, "signal has no variation");

  const auto lag_lo = static_cast<std::size_t>(std::max(1.0, std::ceil(band_lo_s / signal.dt_s)));
  const auto lag_hi = std::min(n - 2, static_cast<std::size_t>(std::floor(band_hi_s / signal.dt_s)));
  if (lag_lo >= lag_hi) fail(ErrorCode::NoCyclesFound, "period band is empty at this sampling rate");

  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
    return s / energy;
  };
  std::vector<double> r(lag_hi + 2, 0.0);
  for (std::size_t lag = lag_lo - 1; lag <= lag_hi + 1; ++lag) r[lag] = acf(lag);

  std::vector<std::size_t> peaks;
  double highest = 0.0;
  for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
    if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] > 0.0) {
      peaks.push_back(lag);
      highest = std::max(highest, r[lag]);
    }
  }
  if (peaks.empty()) fail(ErrorCode::NoCyclesFound, "no autocorrelation peak in the period band");
  // Multiples of the period can beat the fundamental when it falls between
  // lags, so take the shortest lag that comes close to the highest peak.
  const std::size_t best = *std::find_if(peaks.begin(), peaks.end(),
                                         [&](std::size_t lag) { return r[lag] >= kSubharmonicRatio * highest; });

  const double a = r[best - 1];
  const double b = r[best];
  const double c = r[best + 1];
  const double curvature = a - 2.0 * b + c;
  const double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
  return (static_cast<double>(best) + std::clamp(shift, -0.5, 0.5)) * signal.dt_s;
}

CycleParams cycle_params(const SampledSignal& flow, const CycleBoundary& boundary) {
  const double t_first = flow.t0_s;
  const double t_last = flow.end_time();
  const double tol = 1e-9 * flow.dt_s;
  if (boundary.start_s < t_first - tol || boundary.end_s > t_last + tol) {
    fail(ErrorCode::InvalidArgument, "cycle boundary lies outside the signal span");
  }
  const double period = boundary.period_s();
  if (!(period >= 2.0 * flow.dt_s - tol)) {
    fail(ErrorCode::DegenerateCycle, "cycle spans fewer than 2 samples");
  }

  const std::size_t last = flow.size() - 1;
  auto value_at = [&](double t) {
    const double u = std::clamp((t - flow.t0_s) / flow.dt_s, 0.0, static_cast<double>(last));
    const auto i = std::min(static_cast<std::size_t>(std::floor(u)), last - 1);
    const double f = u - static_cast<double>(i);
    return flow.values[i] + f * (flow.values[i + 1] - flow.values[i]);
  };
  // Grid indices strictly inside (start, end).
  const double u0 = (boundary.start_s - flow.t0_s) / flow.dt_s;
  const double u1 = (boundary.end_s - flow.t0_s) / flow.dt_s;
  auto first_inside = static_cast<std::size_t>(std::max(0.0, std::floor(u0 + 1e-9) + 1.0));
  auto last_inside = static_cast<std::size_t>(std::max(0.0, std::ceil(u1 - 1e-9) - 1.0));
  last_inside = std::min(last_inside, last);

  double integral = 0.0;  // ml/min * s
  double prev_t = boundary.start_s;
  double prev_q = value_at(boundary.start_s);
  for (std::size_t i = first_inside; i <= last_inside && first_inside <= last_inside; ++i) {
    const double t = flow.time(i);
    integral += 0.5 * (prev_q + flow.values[i]) * (t - prev_t);
    prev_t = t;
    prev_q = flow.values[i];
  }
  integral += 0.5 * (prev_q + value_at(boundary.end_s)) * (boundary.end_s - prev_t);

  CycleParams p;
  p.cardiac_period_s = period;
  p.stroke_volume_ml = integral / 60.0;
  p.mean_flow_ml_min = 60.0 * p.stroke_volume_ml / period;
  return p;
}

CycleDetection detect_cycles(const SampledSignal& flow, const DetectionParams& params) {
  flow.validate();
  if (flow.kind != SignalKind::Flow) fail(ErrorCode::InvalidArgument, "cycle detection needs a flow signal");
  if (!(params.period_band_lo_s > 0.0) || !(params.period_band_hi_s > params.period_band_lo_s) ||
      !(params.min_separation_fraction > 0.0) || params.upsample_factor < 1) {
    fail(ErrorCode::InvalidArgument, "invalid cycle detection parameters");
  }
  if (flow.duration() < 3.0 * params.period_band_hi_s) {
    fail(ErrorCode::TooShort, "flow signal shorter than 3x the longest admissible period");
  }

  CycleDetection out;
  out.period_estimate_s = estimate_period(flow, params.period_band_lo_s, params.period_band_hi_s);

  const SampledSignal fine = resample(flow, params.upsample_factor);
  const auto& y = fine.values;

  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] < y[i - 1] && y[i] <= y[i + 1]) minima.push_back(i);
  }
  // Deepest first; equal depth resolves to the earliest index.
  std::stable_sort(minima.begin(), minima.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  const double min_gap = params.min_separation_fraction * out.period_estimate_s / fine.dt_s;
  std::set<std::size_t> kept;
  for (const auto i : minima) {
    const auto next = kept.lower_bound(i);
    if (next != kept.end() && static_cast<double>(*next - i) < min_gap) continue;
    if (next != kept.begin() && static_cast<double>(i - *std::prev(next)) < min_gap) continue;
    kept.insert(i);
  }
  if (kept.size() < 3) {
    fail(ErrorCode::NoCyclesFound, "found " + std::to_string(kept.size()) + " cycle boundaries");
  }

  const std::vector<std::size_t> bounds(kept.begin(), kept.end());
  out.cycles.reserve(bounds.size() - 1);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    CCFC c;
    c.boundary = {fine.time(bounds[k]), fine.time(bounds[k + 1])};
    c.samples.assign(y.begin() + static_cast<std::ptrdiff_t>(bounds[k]),
                     y.begin() + static_cast<std::ptrdiff_t>(bounds[k + 1]) + 1);
    c.params = cycle_params(fine, c.boundary);
    const double ratio = c.params.cardiac_period_s / out.period_estimate_s;
    c.status = (ratio < params.validity_lo || ratio > params.validity_hi) ? CycleStatus::PeriodOutOfBand
                                                                          : CycleStatus::Valid;
    out.cycles.push_back(std::move(c));
  }
  return out;
}

}  // namespace rtpc::cycles
