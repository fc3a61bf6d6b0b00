#include "rtpc/report.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "rtpc/error.hpp"
#include "rtpc/io.hpp"

namespace rtpc {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json diff_to_json(const DiffRecord& d) {
  json scan_values = json::array();
  for (const auto& v : d.scan_diff_pct) scan_values.push_back(optional_number(v));
  return json{{"at_zero_pct", optional_number(d.at_zero_pct)},
              {"max_pct", d.max_pct},
              {"delay_s", d.delay_s},
              {"delay_pct", d.delay_pct},
              {"scan", json{{"delays_s", d.scan_delays_s}, {"diff_pct", scan_values}}}};
}

DiffRecord diff_from_json(const json& j) {
  DiffRecord d;
  d.at_zero_pct = read_optional(j.at("at_zero_pct"));
  d.max_pct = j.at("max_pct").get<double>();
  d.delay_s = j.at("delay_s").get<double>();
  d.delay_pct = j.at("delay_pct").get<double>();
  if (j.contains("scan")) {
    const auto& scan = j.at("scan");
    d.scan_delays_s = scan.at("delays_s").get<std::vector<double>>();
    for (const auto& v : scan.at("diff_pct")) d.scan_diff_pct.push_back(read_optional(v));
  }
  return d;
}

}  // namespace

void Report::validate() const {
  if (!(resp_period_s > 0.0)) fail(ErrorCode::InvalidArgument, "report resp_period_s must be positive");
  for (const auto& artery : arteries) {
    for (const auto p : kAllParameters) {
      const auto& d = artery.diff_for(p);
      const double expected = 100.0 * d.delay_s / resp_period_s;
      if (std::abs(d.delay_pct - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        fail(ErrorCode::InvalidArgument, "inconsistent delay_pct for " + artery.name + "/" +
                                             std::string(to_string(p)));
      }
    }
  }
}

json to_json(const Report& report) {
  json arteries = json::array();
  for (const auto& a : report.arteries) {
    json diff = json::object();
    for (const auto p : kAllParameters) diff[std::string(to_string(p))] = diff_to_json(a.diff_for(p));
    arteries.push_back(json{
        {"name", a.name},
        {"mean_flow_ml_min", a.mean_flow_ml_min},
        {"stroke_volume_ml", a.stroke_volume_ml},
        {"cardiac_period_s", a.cardiac_period_s},
        {"n_cycles", a.n_cycles},
        {"qc", json{{"cardiac_snr", optional_number(a.qc.cardiac_snr)}, {"excluded", a.qc.excluded}}},
        {"diff", diff},
    });
  }
  return json{{"version", report.version},
              {"config", report.config},
              {"resp_period_s", report.resp_period_s},
              {"arteries", arteries}};
}

Report report_from_json(const json& j) {
  try {
    Report r;
    r.version = j.at("version").get<std::string>();
    r.config = j.at("config");
    r.resp_period_s = j.at("resp_period_s").get<double>();
    for (const auto& ja : j.at("arteries")) {
      ArteryRecord a;
      a.name = ja.at("name").get<std::string>();
      a.mean_flow_ml_min = ja.at("mean_flow_ml_min").get<double>();
      a.stroke_volume_ml = ja.at("stroke_volume_ml").get<double>();
      a.cardiac_period_s = ja.at("cardiac_period_s").get<double>();
      a.n_cycles = ja.at("n_cycles").get<std::size_t>();
      a.qc.cardiac_snr = read_optional(ja.at("qc").at("cardiac_snr"));
      a.qc.excluded = ja.at("qc").at("excluded").get<bool>();
      for (const auto p : kAllParameters) {
        a.diff[static_cast<std::size_t>(p)] = diff_from_json(ja.at("diff").at(std::string(to_string(p))));
      }
      r.arteries.push_back(std::move(a));
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

std::string dump_report(const Report& report) { return to_json(report).dump(2) + "\n"; }

void write_report(const Report& report, const std::filesystem::path& path) {
  report.validate();
  io::write_text_atomic(path, dump_report(report));
}

Report read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace rtpc
