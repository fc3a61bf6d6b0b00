// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rtpc/cardiac_cycles.hpp"
#include "rtpc/diff_analysis.hpp"
#include "rtpc/error.hpp"
#include "rtpc/flow_extraction.hpp"
#include "rtpc/pipeline.hpp"
#include "rtpc/respiration.hpp"
#include "rtpc/stats.hpp"
#include "rtpc/synthgen.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rtpc;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << "failed: " << what << "; ";
    ok = ok && cond;
  }
};

synth::SimConfig base_config() {
  synth::SimConfig c;
  c.duration_s = 300.0;
  c.modulation.mean_flow_pct = 10.0;
  return c;
}

ArteryRecord analyze_one(const synth::SimConfig& c) {
  const auto sig = synth::generate_signals(c);
  return pipeline::analyze({{"sim", sig.flow}}, sig.resp).arteries.front();
}

bool in_zero_window(double delay_s, double period_s) {
  return (delay_s >= 0.0 && delay_s <= 0.47) || (delay_s >= period_s - 0.47 && delay_s < period_s);
}

void c1(Check& k) {
  const auto t0 = Clock::now();
  const auto c = base_config();
  const auto sig = synth::generate_signals(c);
  const auto report = pipeline::analyze({{"sim", sig.flow}}, sig.resp);
  const double elapsed = seconds_since(t0);
  const auto& d = report.arteries.front().diff_for(Parameter::MeanFlow);
  k.detail << "max " << d.max_pct << "% at " << d.delay_s << " s (T " << report.resp_period_s << " s), "
           << elapsed << " s; ";
  k.expect(d.max_pct >= 8.5 && d.max_pct <= 11.5, "max_diff_pct in [8.5, 11.5]");
  k.expect(in_zero_window(d.delay_s, report.resp_period_s), "argmax near zero delay");
  k.expect(elapsed < 2.0, "runtime < 2 s");
}

void c2(Check& k) {
  auto c = base_config();
  c.modulation.sensor_delay_s = 1.2;
  const auto d = analyze_one(c).diff_for(Parameter::MeanFlow);
  k.detail << "delay " << d.delay_s << " s, " << d.delay_pct << "%; ";
  k.expect(std::abs(d.delay_s - 1.2) <= 0.47, "argmax_delay_s = 1.2 +- 0.47");
  k.expect(std::abs(d.delay_pct - 27.9) <= 11.0, "delay_pct = 27.9 +- 11");
}

void c3(Check& k) {
  auto c = base_config();
  c.modulation.mean_flow_pct = 0.0;
  c.modulation.period_pct = 8.0;
  const auto d = analyze_one(c).diff_for(Parameter::CardiacPeriod);
  k.detail << "period max " << d.max_pct << "%; ";
  k.expect(d.max_pct >= 6.5 && d.max_pct <= 9.5, "cardiac-period max_diff_pct in [6.5, 9.5]");
}

void c4(Check& k) {
  std::vector<synth::SimConfig> inputs;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto c = base_config();
    c.seed = seed;
    c.duration_s = 120.0;
    c.modulation.period_pct = 5.0 * static_cast<double>(seed);
    c.modulation.sensor_delay_s = 0.7 * static_cast<double>(seed);
    c.artifacts.noise_sd = 15.0 * static_cast<double>(seed - 1);
    if (seed == 3) c.respiration.belt_waveform = synth::BeltWaveform::RoundedSquare;
    inputs.push_back(c);
  }
  std::size_t n_cycles = 0;
  double worst = 0.0;
  for (const auto& c : inputs) {
    const auto sig = synth::generate_signals(c);
    const auto det = cycles::detect_cycles(sig.flow);
    for (const auto& cy : det.cycles) {
      const auto& p = cy.params;
      const double sv = 60.0 * p.stroke_volume_ml;
      if (sv != 0.0) worst = std::max(worst, std::abs(p.mean_flow_ml_min * p.cardiac_period_s - sv) / std::abs(sv));
      ++n_cycles;
    }
    const auto iv = resp::detect_resp_intervals(sig.resp);
    for (double delay = 0.0; delay < iv.mean_period_s(); delay += 0.075) {
      const auto shifted = resp::shift_intervals(iv, delay);
      const auto labels = resp::label_cycles(det.cycles, shifted);
      bool partition = labels.size() == det.cycles.size();
      for (std::size_t i = 0; partition && i < labels.size(); ++i) {
        const double mid = det.cycles[i].boundary.midpoint_s();
        const bool inside = mid >= shifted.span_start_s() && mid < shifted.span_end_s();
        partition = (labels[i] == resp::PhaseLabel::Unlabeled) != inside;
      }
      k.expect(partition, "labels partition the cycles");
    }
    for (const auto& d : pipeline::analyze({{"sim", sig.flow}}, sig.resp).arteries.front().diff) {
      k.expect(d.delay_pct >= 0.0 && d.delay_pct < 100.0, "delay_pct in [0, 100)");
    }
  }
  k.detail << n_cycles << " cycles, worst identity residual " << worst << "; ";
  k.expect(worst <= 1e-12, "mean_flow * period = 60 SV");

  // Every cycle identical: the scan must be exactly flat.
  const auto resp_signal = synth::generate_signals(base_config()).resp;
  std::vector<cycles::CCFC> flat;
  for (double t = 0.0; t + 0.94 < 300.0; t += 0.94) {
    cycles::CCFC cy;
    cy.boundary = {t, t + 0.94};
    cy.params = {740.0, 740.0 * 0.94 / 60.0, 0.94};
    flat.push_back(cy);
  }
  bool zeros = true;
  for (const auto& scan : diff::delay_scan_all(flat, resp::detect_resp_intervals(resp_signal))) {
    for (const auto& v : scan.diff_pct) zeros = zeros && v.has_value() && *v == 0.0;
  }
  k.expect(zeros, "diff_pct == 0 on constant flow");
}

void c5(Check& k) {
  synth::SimConfig c;
  c.duration_s = 30.0;
  c.vessel.venc_mm_s = 1500.0;

  {
    auto noisy = c;
    noisy.artifacts.pixel_noise_sd_mm_s = 4.0;
    noisy.artifacts.eddy_offset_mm_s = 1.5;
    const auto images = synth::generate_velocity_series(noisy);
    const auto roi = flow::replicate_mask(images.mask, images.series.n_frames);
    auto shifted = images.series;
    for (double& v : shifted.frames) v += 5.0;
    const auto a = flow::compute_flow(flow::correct_background(images.series, roi).series, roi).flow.values;
    const auto b = flow::compute_flow(flow::correct_background(shifted, roi).series, roi).flow.values;
    double drift = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) drift = std::max(drift, std::abs(a[t] - b[t]));
    k.detail << "offset drift " << drift << " ml/min; ";
    k.expect(drift <= 1e-6, "constant-offset invariance");
  }

  {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> level(-12000, 12000);
    std::bernoulli_distribution pick(0.2);
    const double venc = 500.0;
    VelocityMapSeries truth(16, 16, 12, 75.0, venc, 0.5);
    RoiMask mask(16, 16);
    for (std::uint32_t y = 0; y < 16; ++y) {
      for (std::uint32_t x = 0; x < 16; ++x) {
        if ((x - 7.5) * (x - 7.5) + (y - 7.5) * (y - 7.5) < 36.0) mask.set(x, y);
      }
    }
    for (std::size_t t = 0; t < truth.n_frames; ++t) {
      auto f = truth.frame(t);
      for (std::size_t p = 0; p < f.size(); ++p) f[p] = mask.member[p] ? 300.0 + level(rng) / 64.0 : 0.0;
    }
    auto wrapped = truth;
    for (std::size_t t = 0; t < truth.n_frames; ++t) {
      auto f = wrapped.frame(t);
      for (std::size_t p = 0; p < f.size(); ++p) {
        if (mask.member[p] && pick(rng)) f[p] += (f[p] > 300.0 ? -2.0 : 2.0) * venc;
      }
    }
    const auto r = flow::unalias(wrapped, flow::replicate_mask(mask, truth.n_frames));
    k.detail << r.corrected_pixels << " pixels unwrapped; ";
    k.expect(r.series == truth && r.corrected_pixels > 0, "wrap/unwrap round trip");
  }

  {
    auto eddy = c;
    eddy.artifacts.eddy_offset_mm_s = 3.0;
    eddy.artifacts.pixel_noise_sd_mm_s = 5.0;
    const auto images = synth::generate_velocity_series(eddy);
    const auto est =
        flow::correct_background(images.series, flow::replicate_mask(images.mask, images.series.n_frames)).estimate;
    k.detail << "eddy estimate " << est.offset_mm_s << " mm/s; ";
    k.expect(std::abs(est.offset_mm_s - 3.0) <= 0.1, "eddy offset 3.0 +- 0.1");
  }

  {
    const auto images = synth::generate_velocity_series(c);
    pipeline::ExtractOptions opt;
    opt.mask = images.mask;
    const auto q = pipeline::extract_flow(images.series, opt).extraction.flow.values;
    double worst = 0.0;
    for (std::size_t t = 0; t < q.size(); ++t) {
      worst = std::max(worst, std::abs(q[t] - images.flow.values[t]) / std::abs(images.flow.values[t]));
    }
    k.detail << "reconstruction error " << 100.0 * worst << "%; ";
    k.expect(q.size() == images.flow.size() && worst <= 0.005, "reconstruction within 0.5%");
  }
}

void c6(Check& k) {
  std::mt19937_64 rng(2024);
  double library_s = 0.0;
  std::size_t spearman_ok = 0;
  std::size_t wilcoxon_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 10)(rng);
    std::uniform_int_distribution<int> level(0, static_cast<int>(n) - 1);
    std::vector<double> x(n);
    std::vector<double> y(n);
    do {
      for (double& v : x) v = level(rng);
      for (double& v : y) v = level(rng);
    } while (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
             std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }));
    const auto t0 = Clock::now();
    const auto r = stats::spearman(x, y);
    library_s += seconds_since(t0);
    const auto o = test::brute_spearman(x, y);
    spearman_ok += std::abs(r.rho - o.rho) <= 1e-12 && r.p_value == o.p ? 1 : 0;
  }
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    std::uniform_int_distribution<int> level(-4, 4);
    std::vector<double> x(n);
    const std::vector<double> y(n, 0.0);
    do {
      for (double& v : x) v = level(rng);
    } while (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));
    const auto t0 = Clock::now();
    const auto r = stats::wilcoxon_signed_rank(x, y);
    library_s += seconds_since(t0);
    const auto o = test::brute_wilcoxon(x, y);
    wilcoxon_ok += r.n_nonzero == o.n && r.w_statistic == o.w && r.p_value == o.p ? 1 : 0;
  }
  k.detail << "spearman " << spearman_ok << "/50, wilcoxon " << wilcoxon_ok << "/50, " << library_s << " s; ";
  k.expect(spearman_ok == 50, "spearman equals enumeration");
  k.expect(wilcoxon_ok == 50, "wilcoxon equals enumeration");
  k.expect(library_s < 10.0, "runtime < 10 s");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int shell(const std::string& cmd) {
  const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

void c7(Check& k) {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("rtpc-accept-" + std::to_string(rd()));
  fs::create_directories(dir);
  {
    std::ofstream(dir / "config.json")
        << R"({"duration_s": 120, "seed": 11, "modulation": {"mean_flow_pct": 10, "sensor_delay_s": 0.6},)"
        << R"( "artifacts": {"noise_sd": 20}})";
  }
  const std::string bin = RTPC_BINARY;
  for (const char* run : {"a", "b"}) {
    const auto out = dir / run;
    k.expect(shell(bin + " simulate --config " + (dir / "config.json").string() + " --out-dir " + out.string()) == 0,
             "simulate exits 0");
    k.expect(shell(bin + " analyze --flow " + (out / "flow.csv").string() + " --resp " + (out / "resp.csv").string() +
                   " --out " + (out / "report.json").string()) == 0,
             "analyze exits 0");
  }
  for (const char* f : {"truth.json", "report.json", "flow.csv", "resp.csv"}) {
    const auto a = slurp(dir / "a" / f);
    k.expect(!a.empty() && a == slurp(dir / "b" / f), std::string(f) + " byte-identical");
  }
  k.detail << "two simulate + analyze runs compared; ";
  fs::remove_all(dir);
}

void c8(Check& k) {
  const auto amplitude = synth::generate_signals(base_config()).truth.pulse_amplitude_ml_min;
  std::size_t within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto c = base_config();
    c.seed = seed;
    c.artifacts.noise_sd = 0.05 * amplitude;
    try {
      within += std::abs(analyze_one(c).diff_for(Parameter::MeanFlow).max_pct - 10.0) <= 3.0 ? 1 : 0;
    } catch (const Error& e) {
      k.detail << "seed " << seed << ": " << e.what() << "; ";
    }
  }
  k.detail << "noise sd " << 0.05 * amplitude << " ml/min, " << within << "/100 within +-3; ";
  k.expect(within >= 90, ">= 90 of 100 runs");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"C1 oracle Diff recovery", c1},      {"C2 oracle delay recovery", c2}, {"C3 period modulation", c3},
      {"C4 identities", c4},                {"C5 extraction", c5},            {"C6 exact statistics", c6},
      {"C7 determinism", c7},               {"C8 noise robustness", c8},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check k;
    try {
      run(k);
    } catch (const std::exception& e) {
      k.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (k.ok ? "PASS " : "FAIL ") << name << " (" << k.detail.str() << ")" << std::endl;
    failed += k.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
