#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rtpc/error.hpp"
#include "rtpc/types.hpp"

namespace rtpc::test {

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    do {
      path_ = base / ("rtpc-test-" + std::to_string(rd()) + std::to_string(rd()));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary);
  out << contents;
}

inline SampledSignal make_signal(double dt_s, std::vector<double> values, SignalKind kind = SignalKind::Flow,
                                 double t0_s = 0.0) {
  SampledSignal s;
  s.t0_s = t0_s;
  s.dt_s = dt_s;
  s.values = std::move(values);
  s.kind = kind;
  return s;
}

template <typename F>
SampledSignal sample(F&& f, double dt_s, std::size_t n, SignalKind kind = SignalKind::Flow) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i) * dt_s);
  return make_signal(dt_s, std::move(v), kind);
}

inline SampledSignal sine_belt(double period_s, double duration_s, double dt_s = 0.075) {
  const auto n = static_cast<std::size_t>(duration_s / dt_s) + 1;
  return sample([&](double t) { return -std::cos(2.0 * std::numbers::pi * t / period_s); }, dt_s, n,
                SignalKind::Respiration);
}

}  // namespace rtpc::test
