#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rtpc {

/// Time-ordered stack of 2-D velocity maps (mm/s), frame-major then row-major.
///
/// Header fields are binary32 on disk; in memory everything is double so that
/// corrections (offset removal, unwrapping) stay exact to double precision.
struct VelocityMapSeries {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t n_frames = 0;
  double dt_ms = 75.0;
  double venc_mm_s = 0.0;
  double pixel_area_mm2 = 0.0;
  std::vector<double> frames;

  VelocityMapSeries() = default;
  VelocityMapSeries(std::uint32_t width, std::uint32_t height, std::uint32_t n_frames,
                    double dt_ms, double venc_mm_s, double pixel_area_mm2);

  [[nodiscard]] std::size_t frame_size() const { return std::size_t{width} * height; }
  [[nodiscard]] std::span<const double> frame(std::size_t t) const;
  [[nodiscard]] std::span<double> frame(std::size_t t);
  [[nodiscard]] double at(std::size_t t, std::size_t y, std::size_t x) const {
    return frames[t * frame_size() + y * width + x];
  }
  double& at(std::size_t t, std::size_t y, std::size_t x) {
    return frames[t * frame_size() + y * width + x];
  }

  /// Throws InvalidHeader / NonFiniteVelocity when an invariant is broken.
  void validate() const;

  bool operator==(const VelocityMapSeries&) const = default;
};

struct PixelCoord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Binary region-of-interest membership map.
struct RoiMask {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> member;

  RoiMask() = default;
  RoiMask(std::uint32_t width, std::uint32_t height)
      : width(width), height(height), member(std::size_t{width} * height, 0) {}

  [[nodiscard]] bool contains(std::size_t x, std::size_t y) const {
    return member[y * width + x] != 0;
  }
  void set(std::size_t x, std::size_t y, bool on = true) { member[y * width + x] = on ? 1 : 0; }
  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] bool empty() const { return count() == 0; }

  bool operator==(const RoiMask&) const = default;
};

enum class SignalKind { Flow, Respiration };

/// The per-cycle quantities compared between expiration and inspiration.
enum class Parameter { MeanFlow = 0, StrokeVolume = 1, CardiacPeriod = 2 };

inline constexpr std::size_t kParameterCount = 3;
inline constexpr Parameter kAllParameters[kParameterCount] = {
    Parameter::MeanFlow, Parameter::StrokeVolume, Parameter::CardiacPeriod};

std::string_view to_string(Parameter p);

std::string_view to_string(SignalKind kind);

/// Uniformly sampled time series. Flow signals are in ml/min; belt signals in
/// arbitrary units.
struct SampledSignal {
  double t0_s = 0.0;
  double dt_s = 0.0;
  std::vector<double> values;
  SignalKind kind = SignalKind::Flow;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double time(std::size_t i) const { return t0_s + static_cast<double>(i) * dt_s; }
  [[nodiscard]] double end_time() const { return time(values.empty() ? 0 : values.size() - 1); }
  [[nodiscard]] double duration() const { return end_time() - t0_s; }

  /// Throws TooShort / InvalidArgument when an invariant is broken.
  void validate() const;
};

}  // namespace rtpc
