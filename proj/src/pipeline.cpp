#include "rtpc/pipeline.hpp"

#include "rtpc/error.hpp"
#include "rtpc/parallel.hpp"

namespace rtpc::pipeline {

using nlohmann::json;

ExtractResult extract_flow(const VelocityMapSeries& series, const ExtractOptions& options) {
  flow::RoiSeries roi;
  if (options.mask) {
    if (options.mask->width != series.width || options.mask->height != series.height) {
      fail(ErrorCode::DimensionMismatch, "mask and series dimensions differ");
    }
    roi = flow::replicate_mask(*options.mask, series.n_frames);
  } else if (options.seed) {
    roi = flow::segment_roi(series, *options.seed, options.segmentation);
  } else {
    fail(ErrorCode::InvalidArgument, "either a mask or a seed is required");
  }

  ExtractResult out;
  VelocityMapSeries work = series;
  if (options.correct_background) {
    auto corrected = flow::correct_background(work, roi, options.background);
    work = std::move(corrected.series);
    out.background = std::move(corrected.estimate);
  }
  if (options.unalias) {
    auto unwrapped = flow::unalias(work, roi);
    work = std::move(unwrapped.series);
    out.unaliased_pixels = unwrapped.corrected_pixels;
  }
  out.extraction = flow::compute_flow(work, roi);
  out.roi_pixels = flow::union_mask(roi).count();
  if (out.extraction.flow.size() >= flow::kMinQualitySamples) out.quality = flow::quality_score(out.extraction.flow);
  return out;
}

json qc_json(const ExtractResult& r) {
  json j = json::object();
  j["cardiac_snr"] = r.quality ? json(r.quality->cardiac_snr) : json(nullptr);
  j["excluded"] = r.quality ? r.quality->excluded : false;
  j["background_offset_mm_s"] = r.background ? json(r.background->offset_mm_s) : json(nullptr);
  j["background_pixels"] = r.background ? r.background->n_band_pixels : 0;
  j["unaliased_pixels"] = r.unaliased_pixels;
  j["roi_pixels"] = r.roi_pixels;
  j["empty_roi_frames"] = r.extraction.empty_roi_frames;
  return j;
}

json run_config_json(const AnalyzeOptions& o) {
  return json{
      {"diff_definition", kDiffDefinition},
      {"delay_step_s", o.scan.step_s},
      {"min_cycles_per_phase", o.scan.min_cycles_per_phase},
      {"max_missing_fraction", o.scan.max_missing_fraction},
      {"invert_belt", o.respiration.invert},
      {"cabf_name", o.cabf_name},
      {"cardiac",
       {{"upsample_factor", o.cycles.upsample_factor},
        {"period_band_s", {o.cycles.period_band_lo_s, o.cycles.period_band_hi_s}},
        {"min_separation_fraction", o.cycles.min_separation_fraction},
        {"validity_band", {o.cycles.validity_lo, o.cycles.validity_hi}}}},
      {"respiration",
       {{"smooth_window_s", o.respiration.smooth_window_s},
        {"min_separation_s", o.respiration.min_separation_s},
        {"prominence_fraction", o.respiration.prominence_fraction}}},
      {"quality",
       {{"cardiac_band_hz", {o.quality.cardiac_band_lo_hz, o.quality.cardiac_band_hi_hz}},
        {"noise_band_hz", {o.quality.noise_band_lo_hz, o.quality.noise_band_hi_hz}},
        {"snr_threshold", o.quality.snr_threshold},
        {"welch_segment", o.quality.welch_segment}}},
  };
}

ArteryRecord analyze_artery(const std::string& name, const SampledSignal& flow, const resp::RespIntervals& intervals,
                            const AnalyzeOptions& options) {
  ArteryRecord rec;
  rec.name = name;
  const auto detection = cycles::detect_cycles(flow, options.cycles);
  for (const auto& c : detection.cycles) {
    if (!c.valid()) continue;
    rec.mean_flow_ml_min += c.params.mean_flow_ml_min;
    rec.stroke_volume_ml += c.params.stroke_volume_ml;
    rec.cardiac_period_s += c.params.cardiac_period_s;
    ++rec.n_cycles;
  }
  if (rec.n_cycles == 0) fail(ErrorCode::NoCyclesFound, name + ": no valid cardiac cycles");
  const double k = static_cast<double>(rec.n_cycles);
  rec.mean_flow_ml_min /= k;
  rec.stroke_volume_ml /= k;
  rec.cardiac_period_s /= k;

  if (flow.size() >= flow::kMinQualitySamples) {
    const auto q = flow::quality_score(flow, options.quality);
    rec.qc.cardiac_snr = q.cardiac_snr;
    rec.qc.excluded = q.excluded;
  }

  const auto scans = diff::delay_scan_all(detection.cycles, intervals, options.scan);
  for (const auto p : kAllParameters) {
    rec.diff[static_cast<std::size_t>(p)] = diff::extract_result(scans[static_cast<std::size_t>(p)]);
  }
  return rec;
}

Report analyze(const std::vector<NamedFlow>& flows, const SampledSignal& resp, const AnalyzeOptions& options) {
  if (flows.empty()) fail(ErrorCode::InvalidArgument, "at least one flow signal is required");
  const auto intervals = resp::detect_resp_intervals(resp, options.respiration);

  std::vector<NamedFlow> inputs = flows;
  if (flows.size() >= 2) {
    std::vector<SampledSignal> signals;
    for (const auto& f : flows) signals.push_back(f.flow);
    inputs.push_back({options.cabf_name, flow::sum_flows(signals)});
  }

  Report report;
  report.config = run_config_json(options);
  report.resp_period_s = intervals.mean_period_s();
  report.arteries.resize(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    try {
      report.arteries[i] = analyze_artery(inputs[i].name, inputs[i].flow, intervals, options);
    } catch (const Error& e) {
      fail(e.code(), inputs[i].name + ": " + e.what());
    }
  });
  report.validate();
  return report;
}

}  // namespace rtpc::pipeline
