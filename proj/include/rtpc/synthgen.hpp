#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtpc/respiration.hpp"
#include "rtpc/types.hpp"

namespace rtpc::synth {

enum class BeltWaveform { Sine, RoundedSquare };
enum class ModulationShape { Square, Sine };

/// Single-beat flow shape on phase [0, 1): baseline + gamma-variate systolic
/// pulse (x e^(1-x))^systolic_shape with x = phase / systolic_peak_phase,
/// plus a diastolic run-off that rises smoothly over upstroke_phase and decays
/// linearly to the next onset. Normalised to unit mean, so a beat scaled by S
/// has mean flow exactly S. The trough at the onset is the beat minimum.
struct Waveform {
  double systolic_peak_phase = 0.2;
  double systolic_shape = 4.0;
  double upstroke_phase = 0.3;
  double systolic_amplitude = 1.0;
  double diastolic_amplitude = 0.6;
};

struct CardiacConfig {
  double base_period_s = 0.94;
  Waveform waveform;
  double base_mean_flow_ml_min = 740.0;
};

struct RespirationConfig {
  double period_s = 4.3;
  BeltWaveform belt_waveform = BeltWaveform::Sine;
};

/// Percentages are expiration relative to inspiration: with a square shape
/// EX beats carry (1 + pct/100) times the IN value.
struct ModulationConfig {
  double mean_flow_pct = 0.0;
  double period_pct = 0.0;
  ModulationShape shape = ModulationShape::Square;
  double sensor_delay_s = 0.0;
};

struct ArtifactConfig {
  double eddy_offset_mm_s = 0.0;
  double aliased_pixel_fraction = 0.0;
  double noise_sd = 0.0;             // ml/min, on the flow signal
  double pixel_noise_sd_mm_s = 0.0;  // per-pixel velocity noise in images
};

struct VesselConfig {
  double radius_px = 5.0;
  std::uint32_t width = 48;
  std::uint32_t height = 48;
  double peak_velocity_mm_s = 0.0;  // informational; the profile is scaled to the flow
  double venc_mm_s = 800.0;
  double pixel_area_mm2 = 0.5;
};

struct SimConfig {
  double duration_s = 300.0;
  double dt_ms = 75.0;
  CardiacConfig cardiac;
  RespirationConfig respiration;
  ModulationConfig modulation;
  ArtifactConfig artifacts;
  VesselConfig vessel;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& config);

/// Unit-mean beat shape value at phase in [0, 1].
double waveform_value(const Waveform& w, double phase);

/// Flow at the onset trough is shared by all beats; the beat's scaling acts
/// on the pulsatile part above it, so the train is continuous at onsets.
struct Beat {
  double start_s = 0.0;
  double period_s = 0.0;
  double mean_flow_ml_min = 0.0;
  double trough_ml_min = 0.0;
  resp::Phase phase = resp::Phase::In;
};

/// Beat train covering [0, duration]; first beat starts before t = 0.
std::vector<Beat> plan_beats(const SimConfig& config);

/// Samples the piecewise beat train at t0 + i*dt (no noise).
SampledSignal render_flow(const std::vector<Beat>& beats, const Waveform& waveform, double t0_s,
                          double dt_s, std::size_t n);

struct TrueCycle {
  double start_s = 0.0;
  double end_s = 0.0;
  resp::Phase phase = resp::Phase::In;
  double mean_flow_ml_min = 0.0;
  double stroke_volume_ml = 0.0;
  double cardiac_period_s = 0.0;
};

struct GroundTruth {
  std::vector<TrueCycle> cycles;  // complete beats inside the record
  double sensor_delay_s = 0.0;
  double eddy_offset_mm_s = 0.0;
  double pulse_amplitude_ml_min = 0.0;
  double resp_period_s = 0.0;
  RoiMask mask;
  std::vector<std::vector<std::uint32_t>> wrapped_pixels;  // per frame, flat pixel indices
  double peak_velocity_mm_s = 0.0;
};

nlohmann::json to_json(const GroundTruth& truth);

struct SignalSet {
  SampledSignal flow;
  SampledSignal resp;
  GroundTruth truth;
};

SignalSet generate_signals(const SimConfig& config);

struct ImageSet {
  VelocityMapSeries series;
  RoiMask mask;
  GroundTruth truth;
  SampledSignal flow;  // the signal the vessel was scaled to
};

ImageSet generate_velocity_series(const SimConfig& config);

/// Smallest square grid that leaves the default background ring around a
/// vessel of this radius.
std::uint32_t min_grid_size(double radius_px);

}  // namespace rtpc::synth
