#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtpc/cardiac_cycles.hpp"
#include "rtpc/diff_analysis.hpp"
#include "rtpc/flow_extraction.hpp"
#include "rtpc/report.hpp"
#include "rtpc/respiration.hpp"

namespace rtpc::pipeline {

struct ExtractOptions {
  std::optional<RoiMask> mask;     // used for every frame when set
  std::optional<PixelCoord> seed;  // otherwise segment from this seed
  flow::SegmentationParams segmentation;
  flow::BackgroundParams background;
  bool correct_background = true;
  bool unalias = true;
};

struct ExtractResult {
  flow::FlowExtraction extraction;
  std::optional<flow::BackgroundEstimate> background;
  std::size_t unaliased_pixels = 0;
  std::size_t roi_pixels = 0;  // union over frames
  std::optional<flow::QualityScore> quality;
};

/// Segmentation (or fixed mask), background correction, unaliasing, flow.
ExtractResult extract_flow(const VelocityMapSeries& series, const ExtractOptions& options);

nlohmann::json qc_json(const ExtractResult& result);

struct AnalyzeOptions {
  cycles::DetectionParams cycles;
  resp::DetectionParams respiration;
  diff::ScanParams scan;
  flow::QualityParams quality;
  std::string cabf_name = "CABF_extra";  // record for the summed flow, added when >= 2 flows
};

struct NamedFlow {
  std::string name;
  SampledSignal flow;
};

/// The run configuration echoed into reports.
nlohmann::json run_config_json(const AnalyzeOptions& options);

/// One artery record per input flow (input order), then the summed record.
Report analyze(const std::vector<NamedFlow>& flows, const SampledSignal& resp, const AnalyzeOptions& options = {});

/// Cycle-averaged parameters and the delay scan for a single flow.
ArteryRecord analyze_artery(const std::string& name, const SampledSignal& flow, const resp::RespIntervals& intervals,
                            const AnalyzeOptions& options = {});

}  // namespace rtpc::pipeline
