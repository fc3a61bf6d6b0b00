#include "rtpc/diff_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtpc/error.hpp"
#include "rtpc/parallel.hpp"

namespace rtpc::diff {

std::size_t DiffScanResult::missing() const {
  return static_cast<std::size_t>(
      std::count_if(diff_pct.begin(), diff_pct.end(), [](const auto& v) { return !v.has_value(); }));
}

cycles::CycleParams average_params(const std::vector<cycles::CCFC>& cycles,
                                   const std::vector<resp::PhaseLabel>& labels, resp::Phase phase,
                                   std::size_t min_cycles) {
  if (labels.size() != cycles.size()) fail(ErrorCode::InvalidArgument, "one label per cycle required");
  const auto wanted = phase == resp::Phase::In ? resp::PhaseLabel::In : resp::PhaseLabel::Ex;
  // Deviations from the first member are summed, so equal values average
  // to themselves exactly.
  const cycles::CycleParams* ref = nullptr;
  cycles::CycleParams dev;
  std::size_t n = 0;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    if (!cycles[i].valid() || labels[i] != wanted) continue;
    const auto& p = cycles[i].params;
    if (ref == nullptr) ref = &p;
    dev.mean_flow_ml_min += p.mean_flow_ml_min - ref->mean_flow_ml_min;
    dev.stroke_volume_ml += p.stroke_volume_ml - ref->stroke_volume_ml;
    dev.cardiac_period_s += p.cardiac_period_s - ref->cardiac_period_s;
    ++n;
  }
  if (n < std::max<std::size_t>(min_cycles, 1)) {
    fail(ErrorCode::InsufficientCycles, std::to_string(n) + " valid " + std::string(resp::to_string(phase)) +
                                            " cycles, need " + std::to_string(min_cycles));
  }
  const double k = static_cast<double>(n);
  return {ref->mean_flow_ml_min + dev.mean_flow_ml_min / k, ref->stroke_volume_ml + dev.stroke_volume_ml / k,
          ref->cardiac_period_s + dev.cardiac_period_s / k};
}

ParamPercentages diff_ex_in(const cycles::CycleParams& ex, const cycles::CycleParams& in) {
  ParamPercentages out{};
  for (const auto p : kAllParameters) {
    const double denom = in.get(p);
    if (denom == 0.0) {
      fail(ErrorCode::ZeroInspiratoryValue, "inspiratory " + std::string(to_string(p)) + " is zero");
    }
    out[static_cast<std::size_t>(p)] = 100.0 * (ex.get(p) - denom) / denom;
  }
  return out;
}

std::array<DiffScanResult, kParameterCount> delay_scan_all(const std::vector<cycles::CCFC>& cycles,
                                                           const resp::RespIntervals& intervals,
                                                           const ScanParams& params) {
  if (intervals.empty()) fail(ErrorCode::InvalidArgument, "no respiratory intervals");
  if (!(params.step_s > 0.0)) fail(ErrorCode::InvalidArgument, "delay step must be positive");
  const double period = intervals.mean_period_s();

  std::vector<double> delays;
  for (std::size_t k = 0;; ++k) {
    const double d = static_cast<double>(k) * params.step_s;
    if (d >= period) break;
    delays.push_back(d);
  }

  std::vector<std::optional<ParamPercentages>> values(delays.size());
  parallel_for(delays.size(), [&](std::size_t k) {
    const auto labels = resp::label_cycles(cycles, resp::shift_intervals(intervals, delays[k]));
    try {
      const auto ex = average_params(cycles, labels, resp::Phase::Ex, params.min_cycles_per_phase);
      const auto in = average_params(cycles, labels, resp::Phase::In, params.min_cycles_per_phase);
      values[k] = diff_ex_in(ex, in);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientCycles) throw;
    }
  });

  const auto missing = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
  if (static_cast<double>(missing) > params.max_missing_fraction * static_cast<double>(delays.size()) ||
      missing == delays.size()) {
    fail(ErrorCode::InsufficientCycles, std::to_string(missing) + " of " + std::to_string(delays.size()) +
                                            " scanned delays lack enough cycles in one phase");
  }

  std::array<DiffScanResult, kParameterCount> out;
  for (const auto p : kAllParameters) {
    auto& scan = out[static_cast<std::size_t>(p)];
    const auto idx = static_cast<std::size_t>(p);
    scan.parameter = p;
    scan.delays_s = delays;
    scan.resp_period_s = period;
    scan.diff_pct.resize(delays.size());
    bool have_max = false;
    for (std::size_t k = 0; k < delays.size(); ++k) {
      if (!values[k]) continue;
      const double v = (*values[k])[idx];
      scan.diff_pct[k] = v;
      if (!have_max || v > scan.max_diff_pct) {
        scan.max_diff_pct = v;
        scan.argmax_delay_s = delays[k];
        have_max = true;
      }
    }
    scan.diff_at_zero_pct = scan.diff_pct.front();
    scan.delay_pct = 100.0 * scan.argmax_delay_s / period;
  }
  return out;
}

DiffScanResult delay_scan(const std::vector<cycles::CCFC>& cycles, const resp::RespIntervals& intervals,
                          Parameter parameter, const ScanParams& params) {
  return delay_scan_all(cycles, intervals, params)[static_cast<std::size_t>(parameter)];
}

DiffRecord extract_result(const DiffScanResult& scan) {
  DiffRecord r;
  r.at_zero_pct = scan.diff_at_zero_pct;
  r.max_pct = scan.max_diff_pct;
  r.delay_s = scan.argmax_delay_s;
  r.delay_pct = 100.0 * scan.argmax_delay_s / scan.resp_period_s;
  r.scan_delays_s = scan.delays_s;
  r.scan_diff_pct = scan.diff_pct;
  return r;
}

}  // namespace rtpc::diff
