#pragma once

#include <filesystem>
#include <optional>

#include "rtpc/types.hpp"

namespace rtpc::io {

// Velocity series binary layout (little-endian):
//   "RTPC1" | u32 width | u32 height | u32 n_frames
//   | f32 dt_ms | f32 venc_mm_s | f32 pixel_area_mm2
//   | n_frames * height * width f32 velocities (frame-major, row-major)
inline constexpr std::size_t kSeriesHeaderBytes = 5 + 12 + 12;

struct SeriesReadOptions {
  // Used when the header carries venc_mm_s == 0 ("not recorded").
  std::optional<double> venc_override;
};

VelocityMapSeries read_velocity_series(const std::filesystem::path& path,
                                       const SeriesReadOptions& options = {});

/// Velocities and header floats are narrowed to binary32.
void write_velocity_series(const VelocityMapSeries& series, const std::filesystem::path& path);

/// Header fields only; frames are left empty. Accepts venc_mm_s == 0.
VelocityMapSeries read_velocity_header(const std::filesystem::path& path);

// Relative tolerance for the spacing of the time column.
inline constexpr double kUniformSamplingTolerance = 1e-6;

SampledSignal read_signal_csv(const std::filesystem::path& path, SignalKind kind);
void write_signal_csv(const SampledSignal& signal, const std::filesystem::path& path);

RoiMask read_mask(const std::filesystem::path& path, std::uint32_t expected_width,
                  std::uint32_t expected_height);
void write_mask(const RoiMask& mask, const std::filesystem::path& path);

/// Writes `contents` to `path` via a sibling temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace rtpc::io
