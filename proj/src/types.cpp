#include "rtpc/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtpc/error.hpp"

namespace rtpc {

VelocityMapSeries::VelocityMapSeries(std::uint32_t width, std::uint32_t height,
                                     std::uint32_t n_frames, double dt_ms, double venc_mm_s,
                                     double pixel_area_mm2)
    : width(width),
      height(height),
      n_frames(n_frames),
      dt_ms(dt_ms),
      venc_mm_s(venc_mm_s),
      pixel_area_mm2(pixel_area_mm2),
      frames(std::size_t{width} * height * n_frames, 0.0) {}

std::span<const double> VelocityMapSeries::frame(std::size_t t) const {
  return {frames.data() + t * frame_size(), frame_size()};
}

std::span<double> VelocityMapSeries::frame(std::size_t t) {
  return {frames.data() + t * frame_size(), frame_size()};
}

void VelocityMapSeries::validate() const {
  if (width == 0 || height == 0 || n_frames == 0) {
    fail(ErrorCode::InvalidHeader, "series dimensions must be non-zero");
  }
  if (!(dt_ms > 0.0) || !std::isfinite(dt_ms)) {
    fail(ErrorCode::InvalidHeader, "dt_ms must be positive");
  }
  if (!(venc_mm_s > 0.0) || !std::isfinite(venc_mm_s)) {
    fail(ErrorCode::InvalidHeader, "venc_mm_s must be positive");
  }
  if (!(pixel_area_mm2 > 0.0) || !std::isfinite(pixel_area_mm2)) {
    fail(ErrorCode::InvalidHeader, "pixel_area_mm2 must be positive");
  }
  if (frames.size() != frame_size() * n_frames) {
    fail(ErrorCode::InvalidHeader, "frame payload size does not match header");
  }
  const auto bad = std::find_if(frames.begin(), frames.end(),
                                [](double v) { return !std::isfinite(v); });
  if (bad != frames.end()) {
    const auto index = static_cast<std::size_t>(bad - frames.begin());
    fail(ErrorCode::NonFiniteVelocity,
         "non-finite velocity in frame " + std::to_string(index / frame_size()));
  }
}

std::size_t RoiMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(member.begin(), member.end(), [](std::uint8_t m) { return m != 0; }));
}

std::string_view to_string(SignalKind kind) {
  return kind == SignalKind::Flow ? "flow" : "respiration";
}

std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::MeanFlow: return "mean_flow";
    case Parameter::StrokeVolume: return "stroke_volume";
    case Parameter::CardiacPeriod: return "cardiac_period";
  }
  return "unknown";
}

void SampledSignal::validate() const {
  if (values.size() < 2) fail(ErrorCode::TooShort, "signal needs at least 2 samples");
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) fail(ErrorCode::InvalidArgument, "dt_s must be positive");
  if (!std::isfinite(t0_s)) fail(ErrorCode::InvalidArgument, "t0_s must be finite");
  for (const double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "signal contains non-finite samples");
  }
}

}  // namespace rtpc
