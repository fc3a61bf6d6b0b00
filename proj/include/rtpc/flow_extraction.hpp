#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rtpc/types.hpp"

namespace rtpc::flow {

/// One mask per frame; all masks share the series dimensions.
using RoiSeries = std::vector<RoiMask>;

/// Repeats a single (e.g. manually drawn) mask for every frame.
RoiSeries replicate_mask(const RoiMask& mask, std::size_t n_frames);

RoiMask union_mask(const RoiSeries& roi);

struct SegmentationParams {
  double velocity_threshold_fraction = 0.15;
  double max_radius_px = 12.0;
};

/// Threshold-connected region growing from a seed, independently per frame.
/// The threshold is a fraction of the 99th percentile of |v| within
/// max_radius_px of the seed over all frames. Frames where the seed falls
/// below threshold reuse the nearest earlier segmented frame (or the first
/// segmented frame for leading gaps).
RoiSeries segment_roi(const VelocityMapSeries& series, PixelCoord seed,
                      const SegmentationParams& params = {});

struct BackgroundParams {
  double band_inner_px = 2.0;
  double band_outer_px = 6.0;
  double variance_quantile = 0.25;
  std::size_t min_band_pixels = 8;
};

struct BackgroundEstimate {
  double offset_mm_s = 0.0;
  RoiMask band;
  std::size_t n_band_pixels = 0;
};

struct BackgroundCorrection {
  VelocityMapSeries series;
  BackgroundEstimate estimate;
};

/// Static eddy-current offset from low-variance tissue in a ring around the
/// union ROI, subtracted from every pixel of every frame.
BackgroundCorrection correct_background(const VelocityMapSeries& series, const RoiSeries& roi,
                                        const BackgroundParams& params = {});

struct UnaliasResult {
  VelocityMapSeries series;
  std::size_t corrected_pixels = 0;
};

/// Single-pass, median-referenced unwrap of ROI pixels by multiples of 2*VENC.
UnaliasResult unalias(const VelocityMapSeries& series, const RoiSeries& roi);

inline constexpr double kMlMinPerMm3S = 0.06;

struct FlowExtraction {
  SampledSignal flow;
  std::size_t empty_roi_frames = 0;
};

/// Q(t) [ml/min] = 0.06 * pixel_area_mm2 * sum of ROI velocities [mm/s].
FlowExtraction compute_flow(const VelocityMapSeries& series, const RoiSeries& roi);

/// Pointwise sum of flow signals sharing one time grid (e.g. CABF).
SampledSignal sum_flows(const std::vector<SampledSignal>& signals);

struct QualityParams {
  double cardiac_band_lo_hz = 0.7;
  double cardiac_band_hi_hz = 2.0;
  double noise_band_lo_hz = 2.5;
  double noise_band_hi_hz = 6.0;
  double snr_threshold = 5.0;
  std::size_t welch_segment = 256;
};

struct QualityScore {
  double cardiac_snr = 0.0;
  bool excluded = false;
};

inline constexpr std::size_t kMinQualitySamples = 64;

/// Spectral cardiac SNR: peak Welch power in the cardiac band over the median
/// power in the noise band.
QualityScore quality_score(const SampledSignal& flow, const QualityParams& params = {});

}  // namespace rtpc::flow
