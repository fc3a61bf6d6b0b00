#pragma once

#include <cstddef>
#include <vector>

#include "rtpc/types.hpp"

namespace rtpc::cycles {

struct CycleBoundary {
  double start_s = 0.0;
  double end_s = 0.0;

  [[nodiscard]] double period_s() const { return end_s - start_s; }
  [[nodiscard]] double midpoint_s() const { return start_s + 0.5 * period_s(); }
};

/// Per-cycle triple. mean_flow_ml_min is derived as 60 * SV / T, so the
/// identity between the three holds by construction.
struct CycleParams {
  double mean_flow_ml_min = 0.0;
  double stroke_volume_ml = 0.0;
  double cardiac_period_s = 0.0;

  [[nodiscard]] double get(Parameter p) const;
};

enum class CycleStatus { Valid, PeriodOutOfBand };

/// One cardiac-cycle flow curve on the upsampled grid.
struct CCFC {
  CycleBoundary boundary;
  std::vector<double> samples;
  CycleParams params;
  CycleStatus status = CycleStatus::Valid;

  [[nodiscard]] bool valid() const { return status == CycleStatus::Valid; }
};

/// Natural cubic-spline interpolation onto a grid refined by `factor`.
/// Original sample instants keep their original values exactly.
SampledSignal resample(const SampledSignal& signal, int factor);

struct DetectionParams {
  int upsample_factor = 8;
  double period_band_lo_s = 0.4;
  double period_band_hi_s = 2.0;
  double min_separation_fraction = 0.6;
  double validity_lo = 0.6;
  double validity_hi = 1.5;
};

/// Dominant period from the highest biased-autocorrelation peak inside the
/// band, refined by parabolic interpolation. Throws NoCyclesFound.
double estimate_period(const SampledSignal& signal, double band_lo_s, double band_hi_s);

struct CycleDetection {
  double period_estimate_s = 0.0;
  std::vector<CCFC> cycles;  // contiguous, min-to-min
};

/// Segments a flow signal into consecutive diastolic-minimum-bounded cycles.
/// Partial cycles at either end are dropped; cycles whose period falls outside
/// the validity band around the estimate are kept but flagged.
CycleDetection detect_cycles(const SampledSignal& flow, const DetectionParams& params = {});

/// Trapezoidal stroke volume (ml) of `flow` over `boundary`, with linear
/// interpolation at off-grid endpoints.
CycleParams cycle_params(const SampledSignal& flow, const CycleBoundary& boundary);

}  // namespace rtpc::cycles
