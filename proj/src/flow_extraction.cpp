#include "rtpc/flow_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "rtpc/error.hpp"
#include "rtpc/numeric.hpp"
#include "rtpc/parallel.hpp"

namespace rtpc::flow {
namespace {

void check_roi(const VelocityMapSeries& series, const RoiSeries& roi) {
  if (roi.size() != series.n_frames) {
    fail(ErrorCode::DimensionMismatch, "ROI series has " + std::to_string(roi.size()) +
                                           " masks for " + std::to_string(series.n_frames) +
                                           " frames");
  }
  for (const auto& m : roi) {
    if (m.width != series.width || m.height != series.height ||
        m.member.size() != series.frame_size()) {
      fail(ErrorCode::DimensionMismatch, "ROI mask dimensions differ from the series");
    }
  }
}

// 4-connected flood fill from `seed` over pixels with |v| >= threshold.
RoiMask grow_region(std::span<const double> frame, std::uint32_t width, std::uint32_t height,
                    PixelCoord seed, double threshold) {
  RoiMask mask(width, height);
  auto above = [&](std::size_t x, std::size_t y) {
    return std::abs(frame[y * width + x]) >= threshold;
  };
  const auto sx = static_cast<std::size_t>(seed.x);
  const auto sy = static_cast<std::size_t>(seed.y);
  if (!above(sx, sy)) return mask;

  std::vector<std::pair<std::size_t, std::size_t>> stack{{sx, sy}};
  mask.set(sx, sy);
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    auto visit = [&](std::size_t nx, std::size_t ny) {
      if (!mask.contains(nx, ny) && above(nx, ny)) {
        mask.set(nx, ny);
        stack.emplace_back(nx, ny);
      }
    };
    if (x > 0) visit(x - 1, y);
    if (x + 1 < width) visit(x + 1, y);
    if (y > 0) visit(x, y - 1);
    if (y + 1 < height) visit(x, y + 1);
  }
  return mask;
}

// Median of `sorted` with the element at index `skip` removed.
double median_without(const std::vector<double>& sorted, std::size_t skip) {
  const std::size_t m = sorted.size() - 1;
  auto at = [&](std::size_t j) { return j < skip ? sorted[j] : sorted[j + 1]; };
  if (m % 2 == 1) return at(m / 2);
  const double lo = at(m / 2 - 1);
  const double hi = at(m / 2);
  return lo + 0.5 * (hi - lo);
}

}  // namespace

RoiSeries replicate_mask(const RoiMask& mask, std::size_t n_frames) {
  return RoiSeries(n_frames, mask);
}

RoiMask union_mask(const RoiSeries& roi) {
  if (roi.empty()) return {};
  RoiMask out(roi.front().width, roi.front().height);
  for (const auto& m : roi) {
    for (std::size_t i = 0; i < out.member.size(); ++i) out.member[i] |= m.member[i];
  }
  return out;
}

RoiSeries segment_roi(const VelocityMapSeries& series, PixelCoord seed,
                      const SegmentationParams& params) {
  series.validate();
  if (seed.x < 0 || seed.y < 0 || seed.x >= series.width || seed.y >= series.height) {
    fail(ErrorCode::InvalidArgument, "seed lies outside the image");
  }
  if (!(params.velocity_threshold_fraction > 0.0) || !(params.max_radius_px >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "segmentation parameters must be positive");
  }

  std::vector<double> near_seed;
  const double r2 = params.max_radius_px * params.max_radius_px;
  for (std::uint32_t y = 0; y < series.height; ++y) {
    for (std::uint32_t x = 0; x < series.width; ++x) {
      const double dx = static_cast<double>(x) - static_cast<double>(seed.x);
      const double dy = static_cast<double>(y) - static_cast<double>(seed.y);
      if (dx * dx + dy * dy > r2) continue;
      for (std::size_t t = 0; t < series.n_frames; ++t) near_seed.push_back(std::abs(series.at(t, y, x)));
    }
  }
  const double reference = quantile(std::move(near_seed), 0.99);
  if (!(reference > 0.0)) {
    fail(ErrorCode::EmptySegmentation, "no moving pixels within max_radius_px of the seed");
  }
  const double threshold = params.velocity_threshold_fraction * reference;

  RoiSeries roi(series.n_frames);
  parallel_for(series.n_frames, [&](std::size_t t) {
    roi[t] = grow_region(series.frame(t), series.width, series.height, seed, threshold);
  });

  // Sequential fix-up for frames where the seed dropped below threshold.
  const auto first = std::find_if(roi.begin(), roi.end(), [](const RoiMask& m) { return !m.empty(); });
  if (first == roi.end()) {
    fail(ErrorCode::SeedOutsideVessel, "seed pixel is below the velocity threshold in every frame");
  }
  const RoiMask leading = *first;
  for (auto it = roi.begin(); it != first; ++it) *it = leading;
  for (auto it = first + 1; it != roi.end(); ++it) {
    if (it->empty()) *it = *(it - 1);
  }
  return roi;
}

BackgroundCorrection correct_background(const VelocityMapSeries& series, const RoiSeries& roi,
                                        const BackgroundParams& params) {
  series.validate();
  check_roi(series, roi);
  if (params.band_inner_px < 0.0 || params.band_outer_px < params.band_inner_px ||
      params.variance_quantile < 0.0 || params.variance_quantile > 1.0) {
    fail(ErrorCode::InvalidArgument, "invalid background band parameters");
  }
  const RoiMask all = union_mask(roi);
  std::vector<std::pair<double, double>> roi_pixels;
  for (std::uint32_t y = 0; y < series.height; ++y) {
    for (std::uint32_t x = 0; x < series.width; ++x) {
      if (all.contains(x, y)) roi_pixels.emplace_back(x, y);
    }
  }
  if (roi_pixels.empty()) fail(ErrorCode::InvalidArgument, "ROI is empty in every frame");

  // Candidate ring around the union ROI.
  const double inner2 = params.band_inner_px * params.band_inner_px;
  const double outer2 = params.band_outer_px * params.band_outer_px;
  std::vector<std::size_t> candidates;
  for (std::uint32_t y = 0; y < series.height; ++y) {
    for (std::uint32_t x = 0; x < series.width; ++x) {
      if (all.contains(x, y)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [rx, ry] : roi_pixels) {
        const double dx = rx - x;
        const double dy = ry - y;
        best = std::min(best, dx * dx + dy * dy);
      }
      if (best >= inner2 && best <= outer2) candidates.push_back(std::size_t{y} * series.width + x);
    }
  }

  // Temporal standard deviation, centred on the first frame for shift invariance.
  std::vector<double> sds(candidates.size());
  const double n = static_cast<double>(series.n_frames);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::size_t p = candidates[c];
    const double ref = series.frames[p];
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t t = 0; t < series.n_frames; ++t) {
      const double d = series.frames[t * series.frame_size() + p] - ref;
      sum += d;
      sum2 += d * d;
    }
    const double mean = sum / n;
    sds[c] = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
  }

  BackgroundEstimate estimate;
  estimate.band = RoiMask(series.width, series.height);
  if (candidates.size() < params.min_band_pixels) {
    fail(ErrorCode::InsufficientStationaryTissue,
         "only " + std::to_string(candidates.size()) + " pixels in the background ring");
  }
  const double sd_cut = quantile(sds, params.variance_quantile);
  std::vector<double> samples;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (sds[c] > sd_cut) continue;
    estimate.band.member[candidates[c]] = 1;
    ++estimate.n_band_pixels;
    for (std::size_t t = 0; t < series.n_frames; ++t) {
      samples.push_back(series.frames[t * series.frame_size() + candidates[c]]);
    }
  }
  if (estimate.n_band_pixels < params.min_band_pixels) {
    fail(ErrorCode::InsufficientStationaryTissue,
         "only " + std::to_string(estimate.n_band_pixels) + " stationary pixels, need " +
             std::to_string(params.min_band_pixels));
  }
  estimate.offset_mm_s = median(std::move(samples));

  BackgroundCorrection out{series, std::move(estimate)};
  for (double& v : out.series.frames) v -= out.estimate.offset_mm_s;
  return out;
}

UnaliasResult unalias(const VelocityMapSeries& series, const RoiSeries& roi) {
  check_roi(series, roi);
  if (!(series.venc_mm_s > 0.0)) fail(ErrorCode::InvalidArgument, "unalias needs a positive VENC");
  const double venc = series.venc_mm_s;
  const double wrap = 2.0 * venc;

  UnaliasResult out{series, 0};
  std::vector<std::size_t> corrected(series.n_frames, 0);
  parallel_for(series.n_frames, [&](std::size_t t) {
    const auto src = series.frame(t);
    auto dst = out.series.frame(t);
    std::vector<std::size_t> members;
    for (std::size_t p = 0; p < src.size(); ++p) {
      if (roi[t].member[p]) members.push_back(p);
    }
    if (members.size() < 2) return;
    std::vector<double> sorted;
    sorted.reserve(members.size());
    for (const auto p : members) sorted.push_back(src[p]);
    std::sort(sorted.begin(), sorted.end());
    for (const auto p : members) {
      const double v = src[p];
      const auto skip = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
      const double m = median_without(sorted, skip);
      if (std::abs(v - m) > venc) {
        const double k = std::round((m - v) / wrap);
        dst[p] = v + wrap * k;
        ++corrected[t];
      }
    }
  });
  for (const auto c : corrected) out.corrected_pixels += c;
  return out;
}

FlowExtraction compute_flow(const VelocityMapSeries& series, const RoiSeries& roi) {
  check_roi(series, roi);
  FlowExtraction out;
  out.flow.kind = SignalKind::Flow;
  out.flow.t0_s = 0.0;
  out.flow.dt_s = series.dt_ms / 1000.0;
  out.flow.values.assign(series.n_frames, 0.0);
  const double scale = kMlMinPerMm3S * series.pixel_area_mm2;
  for (std::size_t t = 0; t < series.n_frames; ++t) {
    const auto frame = series.frame(t);
    double sum = 0.0;
    std::size_t members = 0;
    for (std::size_t p = 0; p < frame.size(); ++p) {
      if (roi[t].member[p]) {
        sum += frame[p];
        ++members;
      }
    }
    if (members == 0) ++out.empty_roi_frames;
    out.flow.values[t] = scale * sum;
  }
  return out;
}

SampledSignal sum_flows(const std::vector<SampledSignal>& signals) {
  if (signals.empty()) fail(ErrorCode::InvalidArgument, "no flow signals to sum");
  const SampledSignal& ref = signals.front();
  SampledSignal out = ref;
  for (std::size_t i = 1; i < signals.size(); ++i) {
    const SampledSignal& s = signals[i];
    if (s.kind != SignalKind::Flow || ref.kind != SignalKind::Flow) {
      fail(ErrorCode::GridMismatch, "only flow signals can be summed");
    }
    if (s.size() != ref.size() || std::abs(s.dt_s - ref.dt_s) > 1e-9 ||
        std::abs(s.t0_s - ref.t0_s) > 1e-9) {
      fail(ErrorCode::GridMismatch, "flow signal " + std::to_string(i) + " is on a different time grid");
    }
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += s.values[k];
  }
  return out;
}

QualityScore quality_score(const SampledSignal& flow, const QualityParams& params) {
  const std::size_t n = flow.size();
  if (n < kMinQualitySamples) {
    fail(ErrorCode::TooShort, "quality score needs at least " + std::to_string(kMinQualitySamples) +
                                  " samples, got " + std::to_string(n));
  }
  const std::size_t seg = std::min(n, std::max<std::size_t>(params.welch_segment, 16));
  const std::size_t hop = std::max<std::size_t>(1, seg / 2);
  const std::size_t n_bins = seg / 2 + 1;

  std::vector<double> window(seg);
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(seg));
  }
  std::vector<std::complex<double>> twiddle(seg);
  for (std::size_t i = 0; i < seg; ++i) {
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(seg));
  }

  std::vector<double> power(n_bins, 0.0);
  std::size_t n_segments = 0;
  std::vector<double> buf(seg);
  for (std::size_t start = 0; start + seg <= n; start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += flow.values[start + i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (flow.values[start + i] - mean) * window[i];
    for (std::size_t k = 0; k < n_bins; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t i = 0; i < seg; ++i) acc += buf[i] * twiddle[(k * i) % seg];
      power[k] += std::norm(acc);
    }
    ++n_segments;
  }
  for (double& p : power) p /= static_cast<double>(n_segments);

  const double df = 1.0 / (static_cast<double>(seg) * flow.dt_s);
  double peak = -1.0;
  std::vector<double> noise;
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= params.cardiac_band_lo_hz && f <= params.cardiac_band_hi_hz) peak = std::max(peak, power[k]);
    if (f >= params.noise_band_lo_hz && f <= params.noise_band_hi_hz) noise.push_back(power[k]);
  }
  if (peak < 0.0 || noise.empty()) {
    fail(ErrorCode::InvalidArgument, "sampling rate or length does not cover the quality bands");
  }
  const double floor = median(std::move(noise));
  QualityScore score;
  score.cardiac_snr = floor > 0.0 ? peak / floor : (peak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  score.excluded = score.cardiac_snr < params.snr_threshold;
  return score;
}

}  // namespace rtpc::flow
