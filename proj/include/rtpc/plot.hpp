#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rtpc/report.hpp"

namespace rtpc::plot {

/// Diff_Ex-In versus delay as a standalone SVG document. Gaps in the scan
/// (delays lacking cycles) break the curve; the maximum is marked.
std::string diff_curve_svg(const std::string& title, const DiffRecord& record, double resp_period_s);

/// One <artery>_<parameter>.svg per diff record that carries a scan.
/// Returns the files written, in report order.
std::vector<std::filesystem::path> write_plots(const Report& report, const std::filesystem::path& dir);

}  // namespace rtpc::plot
