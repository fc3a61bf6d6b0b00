#include "rtpc/synthgen.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "rtpc/error.hpp"
#include "rtpc/flow_extraction.hpp"
#include "rtpc/parallel.hpp"

namespace rtpc::synth {
namespace {

using nlohmann::json;

// Minimum analysable record, in respiratory periods.
constexpr double kMinBreaths = 3.0;
// Shortest record cycle detection accepts (3x the longest admissible period).
constexpr double kMinDurationS = 6.0;
constexpr double kRoundedSquareSharpness = 3.0;
// Matches the default background ring of flow::correct_background.
constexpr double kBackgroundMarginPx = 6.0;

double gamma_pulse(const Waveform& w, double phase) {
  const double x = phase / w.systolic_peak_phase;
  return std::pow(x * std::exp(1.0 - x), w.systolic_shape);
}

double waveform_raw(const Waveform& w, double phase) {
  const double tail = gamma_pulse(w, 1.0);
  // x^k (e^(k(1-x)) - e^(k(1-1/p))): zero at both ends and never negative.
  const double systolic = gamma_pulse(w, phase) - tail * std::pow(phase, w.systolic_shape);
  double runoff = (1.0 - phase) / (1.0 - w.upstroke_phase);
  if (phase < w.upstroke_phase) {
    const double s = phase / w.upstroke_phase;
    runoff = s * s * (3.0 - 2.0 * s);
  }
  return 1.0 + w.systolic_amplitude * systolic + w.diastolic_amplitude * runoff;
}

double waveform_mean(const Waveform& w) {
  // Integral of the pulse over one beat via the lower incomplete gamma function.
  const double k = w.systolic_shape;
  const double pulse_area = w.systolic_peak_phase * std::exp(k) * std::pow(k, -(k + 1.0)) * std::tgamma(k + 1.0) *
                            boost::math::gamma_p(k + 1.0, k / w.systolic_peak_phase);
  const double tail = gamma_pulse(w, 1.0);
  // Both halves of the run-off average to one half.
  return 1.0 + w.systolic_amplitude * (pulse_area - tail / (k + 1.0)) + w.diastolic_amplitude * 0.5;
}

// +1 during (modelled) expiration, -1 during inspiration. The belt is
// -cos(2 pi t / T): rising (inhalation) over the first half period.
double modulation(const SimConfig& c, double t) {
  const double s = -std::sin(2.0 * std::numbers::pi * t / c.respiration.period_s);
  if (c.modulation.shape == ModulationShape::Sine) return s;
  return s > 0.0 ? 1.0 : -1.0;
}

double belt(const SimConfig& c, double t) {
  const double x = std::cos(2.0 * std::numbers::pi * t / c.respiration.period_s);
  if (c.respiration.belt_waveform == BeltWaveform::Sine) return -x;
  return -std::tanh(kRoundedSquareSharpness * x) / std::tanh(kRoundedSquareSharpness);
}

std::size_t sample_count(const SimConfig& c) {
  return static_cast<std::size_t>(std::floor(c.duration_s / (c.dt_ms / 1000.0) + 1e-9)) + 1;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, where + " must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* known) { return k == known; })) {
      fail(ErrorCode::InvalidConfig, "unknown key '" + k + "' in " + where);
    }
  }
}

}  // namespace

void SimConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::InvalidConfig, what);
  };
  require(dt_ms > 0.0 && std::isfinite(dt_ms), "dt_ms must be positive");
  require(cardiac.base_period_s > 0.0, "cardiac.base_period_s must be positive");
  require(cardiac.base_mean_flow_ml_min > 0.0, "cardiac.base_mean_flow_ml_min must be positive");
  require(respiration.period_s > 0.0, "respiration.period_s must be positive");
  const auto& w = cardiac.waveform;
  require(w.systolic_peak_phase > 0.0 && w.systolic_peak_phase < 1.0, "systolic_peak_phase must be in (0, 1)");
  require(w.systolic_shape >= 1.0 && w.systolic_shape <= 16.0, "systolic_shape must be in [1, 16]");
  require(w.upstroke_phase > 0.0 && w.upstroke_phase < 1.0, "upstroke_phase must be in (0, 1)");
  require(w.systolic_amplitude >= 0.0 && w.diastolic_amplitude >= 0.0, "waveform amplitudes must be >= 0");
  require(std::abs(modulation.mean_flow_pct) < 50.0, "modulation.mean_flow_pct must be in (-50, 50)");
  require(std::abs(modulation.period_pct) < 50.0, "modulation.period_pct must be in (-50, 50)");
  require(w.systolic_amplitude + w.diastolic_amplitude > 0.0, "waveform must be pulsatile");
  // The lowest beat mean has to stay above the shared onset trough.
  const double p = modulation.mean_flow_pct / 100.0;
  require(std::min(1.0, 1.0 + p) / (1.0 + 0.5 * p) > waveform_value(w, 0.0),
          "modulation.mean_flow_pct pushes beat means below the diastolic trough");
  require(modulation.sensor_delay_s >= 0.0, "modulation.sensor_delay_s must be >= 0");
  require(artifacts.noise_sd >= 0.0 && artifacts.pixel_noise_sd_mm_s >= 0.0, "noise levels must be >= 0");
  require(artifacts.aliased_pixel_fraction >= 0.0 && artifacts.aliased_pixel_fraction <= 1.0,
          "artifacts.aliased_pixel_fraction must be in [0, 1]");
  require(std::isfinite(artifacts.eddy_offset_mm_s), "artifacts.eddy_offset_mm_s must be finite");
  require(duration_s >= kMinDurationS && duration_s >= kMinBreaths * respiration.period_s,
          "duration_s must cover at least " + std::to_string(kMinDurationS) + " s and " +
              std::to_string(kMinBreaths) + " respiratory periods");
  require(vessel.venc_mm_s > 0.0 && vessel.pixel_area_mm2 > 0.0, "vessel VENC and pixel area must be positive");
  require(vessel.peak_velocity_mm_s >= 0.0, "vessel.peak_velocity_mm_s must be >= 0");
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  try {
    reject_unknown(j, {"duration_s", "dt_ms", "cardiac", "respiration", "modulation", "artifacts", "vessel", "seed"},
                   "config");
    read_field(j, "duration_s", c.duration_s);
    read_field(j, "dt_ms", c.dt_ms);
    read_field(j, "seed", c.seed);
    if (j.contains("cardiac")) {
      const auto& jc = j.at("cardiac");
      reject_unknown(jc, {"base_period_s", "waveform", "base_mean_flow_ml_min"}, "cardiac");
      read_field(jc, "base_period_s", c.cardiac.base_period_s);
      read_field(jc, "base_mean_flow_ml_min", c.cardiac.base_mean_flow_ml_min);
      if (jc.contains("waveform")) {
        const auto& jw = jc.at("waveform");
        reject_unknown(jw,
                       {"systolic_peak_phase", "systolic_shape", "upstroke_phase", "systolic_amplitude",
                        "diastolic_amplitude"},
                       "cardiac.waveform");
        read_field(jw, "systolic_peak_phase", c.cardiac.waveform.systolic_peak_phase);
        read_field(jw, "systolic_shape", c.cardiac.waveform.systolic_shape);
        read_field(jw, "upstroke_phase", c.cardiac.waveform.upstroke_phase);
        read_field(jw, "systolic_amplitude", c.cardiac.waveform.systolic_amplitude);
        read_field(jw, "diastolic_amplitude", c.cardiac.waveform.diastolic_amplitude);
      }
    }
    if (j.contains("respiration")) {
      const auto& jr = j.at("respiration");
      reject_unknown(jr, {"period_s", "belt_waveform"}, "respiration");
      read_field(jr, "period_s", c.respiration.period_s);
      if (jr.contains("belt_waveform")) {
        const auto s = jr.at("belt_waveform").get<std::string>();
        if (s == "sine") {
          c.respiration.belt_waveform = BeltWaveform::Sine;
        } else if (s == "rounded-square") {
          c.respiration.belt_waveform = BeltWaveform::RoundedSquare;
        } else {
          fail(ErrorCode::InvalidConfig, "belt_waveform must be 'sine' or 'rounded-square'");
        }
      }
    }
    if (j.contains("modulation")) {
      const auto& jm = j.at("modulation");
      reject_unknown(jm, {"mean_flow_pct", "period_pct", "shape", "sensor_delay_s"}, "modulation");
      read_field(jm, "mean_flow_pct", c.modulation.mean_flow_pct);
      read_field(jm, "period_pct", c.modulation.period_pct);
      read_field(jm, "sensor_delay_s", c.modulation.sensor_delay_s);
      if (jm.contains("shape")) {
        const auto s = jm.at("shape").get<std::string>();
        if (s == "square") {
          c.modulation.shape = ModulationShape::Square;
        } else if (s == "sine") {
          c.modulation.shape = ModulationShape::Sine;
        } else {
          fail(ErrorCode::InvalidConfig, "modulation.shape must be 'square' or 'sine'");
        }
      }
    }
    if (j.contains("artifacts")) {
      const auto& ja = j.at("artifacts");
      reject_unknown(ja, {"eddy_offset_mm_s", "aliased_pixel_fraction", "noise_sd", "pixel_noise_sd_mm_s"},
                     "artifacts");
      read_field(ja, "eddy_offset_mm_s", c.artifacts.eddy_offset_mm_s);
      read_field(ja, "aliased_pixel_fraction", c.artifacts.aliased_pixel_fraction);
      read_field(ja, "noise_sd", c.artifacts.noise_sd);
      read_field(ja, "pixel_noise_sd_mm_s", c.artifacts.pixel_noise_sd_mm_s);
    }
    if (j.contains("vessel")) {
      const auto& jv = j.at("vessel");
      reject_unknown(jv, {"radius_px", "grid", "peak_velocity_mm_s", "venc_mm_s", "pixel_area_mm2"}, "vessel");
      read_field(jv, "radius_px", c.vessel.radius_px);
      read_field(jv, "peak_velocity_mm_s", c.vessel.peak_velocity_mm_s);
      read_field(jv, "venc_mm_s", c.vessel.venc_mm_s);
      read_field(jv, "pixel_area_mm2", c.vessel.pixel_area_mm2);
      if (jv.contains("grid")) {
        const auto& jg = jv.at("grid");
        reject_unknown(jg, {"width", "height"}, "vessel.grid");
        read_field(jg, "width", c.vessel.width);
        read_field(jg, "height", c.vessel.height);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("malformed simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const SimConfig& c) {
  const auto& w = c.cardiac.waveform;
  return json{
      {"duration_s", c.duration_s},
      {"dt_ms", c.dt_ms},
      {"cardiac",
       {{"base_period_s", c.cardiac.base_period_s},
        {"base_mean_flow_ml_min", c.cardiac.base_mean_flow_ml_min},
        {"waveform",
         {{"systolic_peak_phase", w.systolic_peak_phase},
          {"systolic_shape", w.systolic_shape},
          {"upstroke_phase", w.upstroke_phase},
          {"systolic_amplitude", w.systolic_amplitude},
          {"diastolic_amplitude", w.diastolic_amplitude}}}}},
      {"respiration",
       {{"period_s", c.respiration.period_s},
        {"belt_waveform", c.respiration.belt_waveform == BeltWaveform::Sine ? "sine" : "rounded-square"}}},
      {"modulation",
       {{"mean_flow_pct", c.modulation.mean_flow_pct},
        {"period_pct", c.modulation.period_pct},
        {"shape", c.modulation.shape == ModulationShape::Square ? "square" : "sine"},
        {"sensor_delay_s", c.modulation.sensor_delay_s}}},
      {"artifacts",
       {{"eddy_offset_mm_s", c.artifacts.eddy_offset_mm_s},
        {"aliased_pixel_fraction", c.artifacts.aliased_pixel_fraction},
        {"noise_sd", c.artifacts.noise_sd},
        {"pixel_noise_sd_mm_s", c.artifacts.pixel_noise_sd_mm_s}}},
      {"vessel",
       {{"radius_px", c.vessel.radius_px},
        {"grid", {{"width", c.vessel.width}, {"height", c.vessel.height}}},
        {"peak_velocity_mm_s", c.vessel.peak_velocity_mm_s},
        {"venc_mm_s", c.vessel.venc_mm_s},
        {"pixel_area_mm2", c.vessel.pixel_area_mm2}}},
      {"seed", c.seed},
  };
}

double waveform_value(const Waveform& w, double phase) { return waveform_raw(w, phase) / waveform_mean(w); }

std::vector<Beat> plan_beats(const SimConfig& c) {
  const double p_flow = c.modulation.mean_flow_pct / 100.0;
  const double p_period = c.modulation.period_pct / 100.0;
  // EX weight e in [0, 1]; normalising by the mid value keeps the
  // time-averaged flow and period near their base values.
  auto period_for = [&](double e) { return c.cardiac.base_period_s * (1.0 + p_period * e) / (1.0 + 0.5 * p_period); };
  auto flow_for = [&](double e) {
    return c.cardiac.base_mean_flow_ml_min * (1.0 + p_flow * e) / (1.0 + 0.5 * p_flow);
  };
  const double delay = c.modulation.sensor_delay_s;
  const double trough = c.cardiac.base_mean_flow_ml_min * waveform_value(c.cardiac.waveform, 0.0);

  std::vector<Beat> beats;
  double t = -0.37 * c.cardiac.base_period_s;
  while (t < c.duration_s + c.cardiac.base_period_s) {
    double period = c.cardiac.base_period_s;
    double m = 0.0;
    for (int iter = 0; iter < 2; ++iter) {
      m = modulation(c, t + 0.5 * period - delay);
      period = period_for(0.5 * (1.0 + m));
    }
    const double e = 0.5 * (1.0 + m);
    beats.push_back({t, period, flow_for(e), trough, m > 0.0 ? resp::Phase::Ex : resp::Phase::In});
    t += period;
  }
  return beats;
}

SampledSignal render_flow(const std::vector<Beat>& beats, const Waveform& waveform, double t0_s, double dt_s,
                          std::size_t n) {
  SampledSignal s;
  s.kind = SignalKind::Flow;
  s.t0_s = t0_s;
  s.dt_s = dt_s;
  s.values.resize(n);
  const double w0 = waveform_value(waveform, 0.0);
  std::size_t b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = s.time(i);
    while (b + 1 < beats.size() && beats[b + 1].start_s <= t) ++b;
    const auto& beat = beats[b];
    const double phase = std::clamp((t - beat.start_s) / beat.period_s, 0.0, 1.0);
    const double gain = (beat.mean_flow_ml_min - beat.trough_ml_min) / (1.0 - w0);
    s.values[i] = beat.trough_ml_min + gain * (waveform_value(waveform, phase) - w0);
  }
  return s;
}

json to_json(const GroundTruth& truth) {
  json cycles = json::array();
  for (const auto& c : truth.cycles) {
    cycles.push_back(json{{"start_s", c.start_s},
                          {"end_s", c.end_s},
                          {"phase", std::string(resp::to_string(c.phase))},
                          {"mean_flow_ml_min", c.mean_flow_ml_min},
                          {"stroke_volume_ml", c.stroke_volume_ml},
                          {"cardiac_period_s", c.cardiac_period_s}});
  }
  json wrapped = json::array();
  for (const auto& frame : truth.wrapped_pixels) wrapped.push_back(frame);
  return json{{"cycles", cycles},
              {"sensor_delay_s", truth.sensor_delay_s},
              {"eddy_offset_mm_s", truth.eddy_offset_mm_s},
              {"pulse_amplitude_ml_min", truth.pulse_amplitude_ml_min},
              {"resp_period_s", truth.resp_period_s},
              {"mask_pixels", truth.mask.count()},
              {"peak_velocity_mm_s", truth.peak_velocity_mm_s},
              {"wrapped_pixels", wrapped}};
}

SignalSet generate_signals(const SimConfig& config) {
  config.validate();
  const double dt = config.dt_ms / 1000.0;
  const std::size_t n = sample_count(config);
  const auto beats = plan_beats(config);

  SignalSet out;
  out.flow = render_flow(beats, config.cardiac.waveform, 0.0, dt, n);
  if (config.artifacts.noise_sd > 0.0) {
    std::seed_seq seq{config.seed, std::uint64_t{1}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, config.artifacts.noise_sd);
    for (double& v : out.flow.values) v += noise(rng);
  }

  out.resp.kind = SignalKind::Respiration;
  out.resp.t0_s = 0.0;
  out.resp.dt_s = dt;
  out.resp.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.resp.values[i] = belt(config, out.resp.time(i));

  auto& truth = out.truth;
  truth.sensor_delay_s = config.modulation.sensor_delay_s;
  truth.eddy_offset_mm_s = config.artifacts.eddy_offset_mm_s;
  truth.resp_period_s = config.respiration.period_s;
  const double t_end = out.flow.end_time();
  for (const auto& b : beats) {
    if (b.start_s < 0.0 || b.start_s + b.period_s > t_end) continue;
    truth.cycles.push_back({b.start_s, b.start_s + b.period_s, b.phase, b.mean_flow_ml_min,
                            b.mean_flow_ml_min * b.period_s / 60.0, b.period_s});
  }
  double w_max = 0.0;
  for (int k = 0; k <= 2000; ++k) w_max = std::max(w_max, waveform_value(config.cardiac.waveform, k / 2000.0));
  truth.pulse_amplitude_ml_min =
      config.cardiac.base_mean_flow_ml_min * (w_max - waveform_value(config.cardiac.waveform, 0.0));
  return out;
}

std::uint32_t min_grid_size(double radius_px) {
  return 2 * static_cast<std::uint32_t>(std::ceil(radius_px + kBackgroundMarginPx + 1.0)) + 1;
}

ImageSet generate_velocity_series(const SimConfig& config) {
  config.validate();
  const auto& v = config.vessel;
  if (!(v.radius_px >= 2.0)) fail(ErrorCode::InvalidConfig, "vessel.radius_px must be >= 2");
  const std::uint32_t need = min_grid_size(v.radius_px);
  if (v.width < need || v.height < need) {
    fail(ErrorCode::InvalidConfig, "vessel grid must be at least " + std::to_string(need) + " pixels square");
  }

  SignalSet signals = generate_signals(config);
  const std::size_t n_frames = signals.flow.size();

  ImageSet out;
  out.series = VelocityMapSeries(v.width, v.height, static_cast<std::uint32_t>(n_frames), config.dt_ms,
                                 v.venc_mm_s, v.pixel_area_mm2);
  out.mask = RoiMask(v.width, v.height);

  // Parabolic profile sampled at pixel centres.
  const double cx = 0.5 * (v.width - 1);
  const double cy = 0.5 * (v.height - 1);
  std::vector<double> weight(out.series.frame_size(), 0.0);
  std::vector<std::uint32_t> core;
  double weight_sum = 0.0;
  for (std::uint32_t y = 0; y < v.height; ++y) {
    for (std::uint32_t x = 0; x < v.width; ++x) {
      const double r2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (v.radius_px * v.radius_px);
      if (r2 >= 1.0) continue;
      const std::uint32_t p = y * v.width + x;
      weight[p] = 1.0 - r2;
      weight_sum += weight[p];
      out.mask.set(x, y);
      if (weight[p] >= 0.5) core.push_back(p);
    }
  }

  std::vector<std::uint32_t> aliased;
  if (config.artifacts.aliased_pixel_fraction > 0.0) {
    std::seed_seq seq{config.seed, std::uint64_t{2}};
    std::mt19937_64 rng(seq);
    aliased = core;
    std::shuffle(aliased.begin(), aliased.end(), rng);
    aliased.resize(static_cast<std::size_t>(
        std::llround(config.artifacts.aliased_pixel_fraction * static_cast<double>(core.size()))));
    std::sort(aliased.begin(), aliased.end());
  }

  const double per_unit_flow = 1.0 / (flow::kMlMinPerMm3S * v.pixel_area_mm2 * weight_sum);
  out.truth = signals.truth;
  out.truth.mask = out.mask;
  out.truth.wrapped_pixels.assign(n_frames, {});
  std::vector<double> frame_peak(n_frames, 0.0);
  parallel_for(n_frames, [&](std::size_t t) {
    auto frame = out.series.frame(t);
    const double scale = signals.flow.values[t] * per_unit_flow;
    for (std::size_t p = 0; p < frame.size(); ++p) {
      frame[p] = scale * weight[p];
      frame_peak[t] = std::max(frame_peak[t], frame[p]);
      frame[p] += config.artifacts.eddy_offset_mm_s;
    }
    if (config.artifacts.pixel_noise_sd_mm_s > 0.0) {
      std::seed_seq seq{config.seed, std::uint64_t{3}, static_cast<std::uint64_t>(t)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> noise(0.0, config.artifacts.pixel_noise_sd_mm_s);
      for (double& value : frame) value += noise(rng);
    }
    for (const auto p : aliased) {
      if (frame[p] > v.venc_mm_s) {
        frame[p] -= 2.0 * v.venc_mm_s;
        out.truth.wrapped_pixels[t].push_back(p);
      }
    }
  });
  out.truth.peak_velocity_mm_s = *std::max_element(frame_peak.begin(), frame_peak.end());
  out.flow = std::move(signals.flow);
  return out;
}

}  // namespace rtpc::synth
