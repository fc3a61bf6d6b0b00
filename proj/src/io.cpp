#include "rtpc/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "rtpc/error.hpp"

namespace rtpc::io {
namespace {

constexpr std::array<char, 5> kMagic{'R', 'T', 'P', 'C', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

double get_f32(const unsigned char* p) {
  return static_cast<double>(std::bit_cast<float>(get_u32(p)));
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path.string());
  return data;
}

void write_bytes_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::IoFailure, "write error on " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoFailure, "cannot rename into " + path.string());
  }
}

VelocityMapSeries parse_header(const std::string& data, const std::filesystem::path& path) {
  if (data.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), data.begin())) {
    fail(ErrorCode::BadMagic, path.string() + " is not an RTPC1 velocity series");
  }
  if (data.size() < kSeriesHeaderBytes) {
    fail(ErrorCode::TruncatedFile, path.string() + ": header is truncated");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(data.data()) + kMagic.size();
  VelocityMapSeries s;
  s.width = get_u32(p);
  s.height = get_u32(p + 4);
  s.n_frames = get_u32(p + 8);
  s.dt_ms = get_f32(p + 12);
  s.venc_mm_s = get_f32(p + 16);
  s.pixel_area_mm2 = get_f32(p + 20);
  if (s.width == 0 || s.height == 0 || s.n_frames == 0) {
    fail(ErrorCode::InvalidHeader, path.string() + ": zero dimension in header");
  }
  if (!(s.dt_ms > 0.0) || !std::isfinite(s.dt_ms)) {
    fail(ErrorCode::InvalidHeader, path.string() + ": dt_ms must be positive");
  }
  if (!(s.pixel_area_mm2 > 0.0) || !std::isfinite(s.pixel_area_mm2)) {
    fail(ErrorCode::InvalidHeader, path.string() + ": pixel_area_mm2 must be positive");
  }
  if (!(s.venc_mm_s >= 0.0) || !std::isfinite(s.venc_mm_s)) {
    fail(ErrorCode::InvalidHeader, path.string() + ": venc_mm_s must be positive");
  }
  return s;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

double round_significant(double v, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
  return std::strtod(buf.data(), nullptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" +
                                    std::string(field) + "'");
  }
  return v;
}

}  // namespace

VelocityMapSeries read_velocity_header(const std::filesystem::path& path) {
  return parse_header(slurp(path), path);
}

VelocityMapSeries read_velocity_series(const std::filesystem::path& path,
                                       const SeriesReadOptions& options) {
  const std::string data = slurp(path);
  VelocityMapSeries s = parse_header(data, path);
  if (s.venc_mm_s == 0.0) {
    if (!options.venc_override) {
      fail(ErrorCode::InvalidHeader, path.string() + ": header has no VENC and none was supplied");
    }
    s.venc_mm_s = *options.venc_override;
    if (!(s.venc_mm_s > 0.0) || !std::isfinite(s.venc_mm_s)) {
      fail(ErrorCode::InvalidHeader, "supplied VENC must be positive");
    }
  }
  const std::size_t n_values = s.frame_size() * s.n_frames;
  const std::size_t payload = data.size() - kSeriesHeaderBytes;
  if (payload / 4 < n_values) {
    fail(ErrorCode::TruncatedFile, path.string() + ": payload holds " + std::to_string(payload / 4) +
                                       " of " + std::to_string(n_values) + " velocities");
  }
  s.frames.resize(n_values);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data()) + kSeriesHeaderBytes;
  for (std::size_t i = 0; i < n_values; ++i) {
    const double v = get_f32(p + 4 * i);
    if (!std::isfinite(v)) {
      fail(ErrorCode::NonFiniteVelocity,
           path.string() + ": non-finite velocity in frame " + std::to_string(i / s.frame_size()));
    }
    s.frames[i] = v;
  }
  return s;
}

void write_velocity_series(const VelocityMapSeries& series, const std::filesystem::path& path) {
  series.validate();
  std::string out;
  out.reserve(kSeriesHeaderBytes + 4 * series.frames.size());
  out.append(kMagic.data(), kMagic.size());
  put_u32(out, series.width);
  put_u32(out, series.height);
  put_u32(out, series.n_frames);
  put_f32(out, series.dt_ms);
  put_f32(out, series.venc_mm_s);
  put_f32(out, series.pixel_area_mm2);
  for (const double v : series.frames) put_f32(out, v);
  write_bytes_atomic(path, out);
}

SampledSignal read_signal_csv(const std::filesystem::path& path, SignalKind kind) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times;
  std::vector<double> values;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!have_header) {
      if (row != "time_s,value") {
        fail(ErrorCode::ParseError, path.string() + ": expected header 'time_s,value'");
      }
      have_header = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      fail(ErrorCode::ParseError, path.string() + ": line " + std::to_string(line_no) +
                                      " must have exactly two fields");
    }
    times.push_back(parse_number(row.substr(0, comma), line_no));
    values.push_back(parse_number(row.substr(comma + 1), line_no));
  }
  if (values.size() < 2) {
    fail(ErrorCode::TooShort, path.string() + ": need at least 2 samples, got " +
                                  std::to_string(values.size()));
  }

  std::vector<double> steps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    steps[i - 1] = times[i] - times[i - 1];
    if (!(steps[i - 1] > 0.0)) {
      fail(ErrorCode::NonMonotoneTime,
           path.string() + ": time does not increase at line " + std::to_string(i + 2));
    }
  }
  std::vector<double> sorted = steps;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (sorted.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (std::abs(steps[i] - median) > kUniformSamplingTolerance * median) {
      fail(ErrorCode::NonUniformSampling,
           path.string() + ": spacing at sample " + std::to_string(i + 1) + " deviates from " +
               format_double(median) + " s");
    }
  }

  SampledSignal s;
  s.t0_s = times.front();
  s.dt_s = round_significant(median, 9);
  s.values = std::move(values);
  s.kind = kind;
  return s;
}

void write_signal_csv(const SampledSignal& signal, const std::filesystem::path& path) {
  signal.validate();
  std::string out = "time_s,value\n";
  out.reserve(out.size() + 40 * signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out += format_double(signal.time(i));
    out += ',';
    out += format_double(signal.values[i]);
    out += '\n';
  }
  write_bytes_atomic(path, out);
}

RoiMask read_mask(const std::filesystem::path& path, std::uint32_t expected_width,
                  std::uint32_t expected_height) {
  const std::string data = slurp(path);
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> unsigned long {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start || pos - start > 9) fail(ErrorCode::NotPgm, path.string() + ": bad PGM header");
    return std::stoul(data.substr(start, pos - start));
  };

  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
    fail(ErrorCode::NotPgm, path.string() + " is not a binary PGM (P5)");
  }
  pos = 2;
  const unsigned long width = read_uint();
  const unsigned long height = read_uint();
  const unsigned long maxval = read_uint();
  if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
    fail(ErrorCode::NotPgm, path.string() + ": unsupported PGM dimensions or maxval");
  }
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    fail(ErrorCode::NotPgm, path.string() + ": missing raster separator");
  }
  ++pos;
  if (width != expected_width || height != expected_height) {
    fail(ErrorCode::DimensionMismatch,
         path.string() + ": mask is " + std::to_string(width) + "x" + std::to_string(height) +
             ", expected " + std::to_string(expected_width) + "x" + std::to_string(expected_height));
  }
  const std::size_t n = width * height;
  if (data.size() - pos < n) fail(ErrorCode::NotPgm, path.string() + ": raster is truncated");

  RoiMask mask(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height));
  for (std::size_t i = 0; i < n; ++i) {
    mask.member[i] = static_cast<unsigned char>(data[pos + i]) > 0 ? 1 : 0;
  }
  return mask;
}

void write_mask(const RoiMask& mask, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  for (const auto m : mask.member) out.push_back(static_cast<char>(m ? 255 : 0));
  write_bytes_atomic(path, out);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view contents) {
  write_bytes_atomic(path, contents);
}

}  // namespace rtpc::io
