#include "rtpc/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rtpc/error.hpp"
#include "rtpc/io.hpp"
#include "rtpc/pipeline.hpp"
#include "rtpc/plot.hpp"
#include "rtpc/synthgen.hpp"

namespace rtpc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Removes everything registered unless commit() was called.
class OutputGuard {
 public:
  OutputGuard() = default;
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove(*it, ec);
  }
  void add(fs::path p) { paths_.push_back(std::move(p)); }
  void add_all(const std::vector<fs::path>& ps) {
    for (const auto& p : ps) add(p);
  }
  void commit() { paths_.clear(); }

 private:
  std::vector<fs::path> paths_;
};

// Creates `dir` (and missing parents); newly created levels are registered
// with the guard, innermost last so they are removed first.
void make_dir(const fs::path& dir, OutputGuard& guard) {
  std::vector<fs::path> created;
  for (fs::path p = fs::absolute(dir); !p.empty() && !fs::exists(p); p = p.parent_path()) {
    created.push_back(p);
    if (p == p.parent_path()) break;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create directory " + dir.string() + ": " + ec.message());
  for (auto it = created.rbegin(); it != created.rend(); ++it) guard.add(*it);
}

PixelCoord parse_seed(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--seed expects X,Y");
  auto parse = [&](std::string_view part) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size()) throw UsageError("--seed expects integer X,Y");
    return v;
  };
  const std::string_view s(text);
  return {parse(s.substr(0, comma)), parse(s.substr(comma + 1))};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ExtractArgs {
  std::string series;
  std::string mask;
  std::string seed;
  double venc = 0.0;
  bool no_background = false;
  bool no_unalias = false;
  std::string out;
  std::string qc;
};

int cmd_extract(const ExtractArgs& a, bool have_mask, bool have_seed, bool have_venc, std::ostream& out) {
  if (have_mask == have_seed) throw UsageError("extract needs exactly one of --mask or --seed");
  const auto header = io::read_velocity_header(a.series);
  if (header.venc_mm_s == 0.0 && !have_venc) {
    throw UsageError(a.series + " does not record a VENC; pass --venc");
  }
  io::SeriesReadOptions read_opts;
  if (have_venc) read_opts.venc_override = a.venc;
  auto series = io::read_velocity_series(a.series, read_opts);
  if (have_venc) series.venc_mm_s = a.venc;

  pipeline::ExtractOptions opts;
  if (have_mask) opts.mask = io::read_mask(a.mask, series.width, series.height);
  if (have_seed) opts.seed = parse_seed(a.seed);
  opts.correct_background = !a.no_background;
  opts.unalias = !a.no_unalias;
  const auto result = pipeline::extract_flow(series, opts);

  OutputGuard guard;
  guard.add(a.out);
  io::write_signal_csv(result.extraction.flow, a.out);
  if (!a.qc.empty()) {
    guard.add(a.qc);
    io::write_text_atomic(a.qc, pipeline::qc_json(result).dump(2) + "\n");
  }
  guard.commit();
  out << "wrote " << a.out << " (" << result.extraction.flow.size() << " samples)\n";
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> flows;
  std::string resp;
  double delay_step_ms = 75.0;
  bool invert_belt = false;
  std::size_t min_cycles = diff::kDefaultMinCyclesPerPhase;
  std::string level = "extra";
  std::string out;
  std::string plots;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  pipeline::AnalyzeOptions opts;
  opts.scan.step_s = a.delay_step_ms / 1000.0;
  opts.scan.min_cycles_per_phase = a.min_cycles;
  opts.respiration.invert = a.invert_belt;
  opts.cabf_name = "CABF_" + a.level;

  std::vector<pipeline::NamedFlow> flows;
  for (const auto& f : a.flows) flows.push_back({fs::path(f).stem().string(), io::read_signal_csv(f, SignalKind::Flow)});
  const auto resp = io::read_signal_csv(a.resp, SignalKind::Respiration);
  const auto report = pipeline::analyze(flows, resp, opts);

  OutputGuard guard;
  guard.add(a.out);
  write_report(report, a.out);
  if (!a.plots.empty()) {
    make_dir(a.plots, guard);
    guard.add_all(plot::write_plots(report, a.plots));
  }
  guard.commit();
  out << "wrote " << a.out << " (" << report.arteries.size() << " arteries)\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool with_images, std::ostream& out) {
  json j;
  try {
    j = json::parse(read_text(config_path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, config_path + ": " + e.what());
  }
  const auto config = synth::sim_config_from_json(j);
  const auto signals = synth::generate_signals(config);

  const fs::path dir(out_dir);
  OutputGuard guard;
  make_dir(dir, guard);
  json files{{"flow", "flow.csv"}, {"resp", "resp.csv"}};
  guard.add(dir / "flow.csv");
  io::write_signal_csv(signals.flow, dir / "flow.csv");
  guard.add(dir / "resp.csv");
  io::write_signal_csv(signals.resp, dir / "resp.csv");

  synth::GroundTruth truth = signals.truth;
  if (with_images) {
    const auto images = synth::generate_velocity_series(config);
    guard.add(dir / "series.rtpc");
    io::write_velocity_series(images.series, dir / "series.rtpc");
    guard.add(dir / "mask.pgm");
    io::write_mask(images.mask, dir / "mask.pgm");
    files["series"] = "series.rtpc";
    files["mask"] = "mask.pgm";
    truth = images.truth;
  }
  const json manifest{{"version", kToolVersion},
                      {"config", synth::to_json(config)},
                      {"files", files},
                      {"truth", synth::to_json(truth)}};
  guard.add(dir / "truth.json");
  io::write_text_atomic(dir / "truth.json", manifest.dump(2) + "\n");
  guard.commit();
  out << "wrote dataset to " << dir.string() << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& plots, std::ostream& out) {
  const auto report = read_report(in);
  OutputGuard guard;
  make_dir(plots, guard);
  const auto written = plot::write_plots(report, plots);
  guard.add_all(written);
  guard.commit();
  out << "wrote " << written.size() << " plots to " << plots << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Respiration-driven changes in real-time phase-contrast flow"};
  app.name("rtpc");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Velocity series -> flow CSV");
  extract->add_option("--series", ex.series, "Velocity series (.rtpc)")->required();
  auto* mask_opt = extract->add_option("--mask", ex.mask, "ROI mask (binary PGM)");
  auto* seed_opt = extract->add_option("--seed", ex.seed, "Segmentation seed X,Y");
  mask_opt->excludes(seed_opt);
  auto* venc_opt = extract->add_option("--venc", ex.venc, "VENC in mm/s")->check(CLI::PositiveNumber);
  extract->add_flag("--no-background-correction", ex.no_background, "Skip eddy-current offset removal");
  extract->add_flag("--no-unalias", ex.no_unalias, "Skip velocity unwrapping");
  extract->add_option("--out", ex.out, "Flow CSV")->required();
  extract->add_option("--qc", ex.qc, "QC sidecar JSON");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Flow + respiration CSVs -> report JSON");
  analyze->add_option("--flow", an.flows, "Flow CSV(s), comma separated")->required()->delimiter(',');
  analyze->add_option("--resp", an.resp, "Respiration belt CSV")->required();
  analyze->add_option("--delay-step-ms", an.delay_step_ms, "Delay scan step")->check(CLI::PositiveNumber);
  analyze->add_flag("--invert-belt", an.invert_belt, "Belt amplitude falls on inhalation");
  analyze->add_option("--min-cycles", an.min_cycles, "Minimum cycles per phase")->check(CLI::PositiveNumber);
  analyze->add_option("--level", an.level, "Name of the summed record (CABF_<level>)")
      ->check(CLI::IsMember({"extra", "intra"}));
  analyze->add_option("--out", an.out, "Report JSON")->required();
  analyze->add_option("--plots", an.plots, "Directory for SVG plots");

  std::string sim_config;
  std::string sim_out;
  bool with_images = false;
  auto* simulate = app.add_subcommand("simulate", "Synthetic dataset with ground truth");
  simulate->add_option("--config", sim_config, "Simulation config JSON")->required();
  simulate->add_option("--out-dir", sim_out, "Output directory")->required();
  simulate->add_flag("--with-images", with_images, "Also write a velocity series and mask");

  std::string report_in;
  std::string report_plots;
  auto* report = app.add_subcommand("report", "Re-plot an existing report");
  report->add_option("--in", report_in, "Report JSON")->required();
  report->add_option("--plots", report_plots, "Directory for SVG plots")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex, mask_opt->count() > 0, seed_opt->count() > 0, venc_opt->count() > 0, out);
    if (analyze->parsed()) return cmd_analyze(an, out);
    if (simulate->parsed()) return cmd_simulate(sim_config, sim_out, with_images, out);
    if (report->parsed()) return cmd_report(report_in, report_plots, out);
  } catch (const UsageError& e) {
    err << "rtpc: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "rtpc: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "rtpc: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace rtpc::cli
