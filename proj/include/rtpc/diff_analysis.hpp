#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "rtpc/cardiac_cycles.hpp"
#include "rtpc/report.hpp"
#include "rtpc/respiration.hpp"

namespace rtpc::diff {

inline constexpr std::size_t kDefaultMinCyclesPerPhase = 3;

/// Arithmetic mean of each parameter over valid cycles carrying `phase`.
/// Throws InsufficientCycles below `min_cycles`.
cycles::CycleParams average_params(const std::vector<cycles::CCFC>& cycles,
                                   const std::vector<resp::PhaseLabel>& labels, resp::Phase phase,
                                   std::size_t min_cycles = kDefaultMinCyclesPerPhase);

/// 100 * (EX - IN) / IN for each parameter, indexed by Parameter.
using ParamPercentages = std::array<double, kParameterCount>;

ParamPercentages diff_ex_in(const cycles::CycleParams& ex, const cycles::CycleParams& in);

struct ScanParams {
  double step_s = 0.075;
  std::size_t min_cycles_per_phase = kDefaultMinCyclesPerPhase;
  double max_missing_fraction = 0.2;
};

struct DiffScanResult {
  Parameter parameter = Parameter::MeanFlow;
  std::vector<double> delays_s;
  std::vector<std::optional<double>> diff_pct;  // empty where a phase lacked cycles
  std::optional<double> diff_at_zero_pct;
  double max_diff_pct = 0.0;
  double argmax_delay_s = 0.0;
  double delay_pct = 0.0;
  double resp_period_s = 0.0;

  [[nodiscard]] std::size_t missing() const;
};

/// Diff_Ex-In on the grid {0, step, 2 step, ...} below the mean respiratory
/// period, maximised over the signed value (ties -> smallest delay).
DiffScanResult delay_scan(const std::vector<cycles::CCFC>& cycles, const resp::RespIntervals& intervals,
                          Parameter parameter, const ScanParams& params = {});

/// All three parameters share the labelling at each delay.
std::array<DiffScanResult, kParameterCount> delay_scan_all(const std::vector<cycles::CCFC>& cycles,
                                                           const resp::RespIntervals& intervals,
                                                           const ScanParams& params = {});

DiffRecord extract_result(const DiffScanResult& scan);

}  // namespace rtpc::diff
