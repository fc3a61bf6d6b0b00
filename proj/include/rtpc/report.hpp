#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtpc/types.hpp"

namespace rtpc {

inline constexpr const char* kToolVersion = "rtpc 1.0.0";
inline constexpr const char* kDiffDefinition = "ex-in-over-in";

/// Extracted Diff_Ex-In summary for one parameter. The scan curve is carried
/// along so plots can be regenerated from a report alone.
struct DiffRecord {
  std::optional<double> at_zero_pct;  // empty when delay 0 lacked cycles
  double max_pct = 0.0;
  double delay_s = 0.0;
  double delay_pct = 0.0;
  std::vector<double> scan_delays_s;
  std::vector<std::optional<double>> scan_diff_pct;
};

struct QcRecord {
  std::optional<double> cardiac_snr;
  bool excluded = false;
};

struct ArteryRecord {
  std::string name;
  double mean_flow_ml_min = 0.0;
  double stroke_volume_ml = 0.0;
  double cardiac_period_s = 0.0;
  std::size_t n_cycles = 0;
  QcRecord qc;
  std::array<DiffRecord, kParameterCount> diff;

  [[nodiscard]] const DiffRecord& diff_for(Parameter p) const {
    return diff[static_cast<std::size_t>(p)];
  }
};

struct Report {
  std::string version = kToolVersion;
  nlohmann::json config = nlohmann::json::object();
  double resp_period_s = 0.0;
  std::vector<ArteryRecord> arteries;

  /// Checks delay_pct == 100 * delay_s / resp_period_s for every record.
  void validate() const;
};

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// Pretty-printed, key-ordered JSON; identical reports give identical bytes.
std::string dump_report(const Report& report);

void write_report(const Report& report, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

}  // namespace rtpc
