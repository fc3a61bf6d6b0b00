#include "rtpc/respiration.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rtpc/synthgen.hpp"
#include "support.hpp"

namespace rtpc::resp {
namespace {

using test::expect_error;

cycles::CCFC cycle_at(double start_s, double end_s) {
  cycles::CCFC c;
  c.boundary = {start_s, end_s};
  return c;
}

RespIntervals periodic_train(double period_s, std::size_t halves) {
  std::vector<RespInterval> v;
  for (std::size_t k = 0; k < halves; ++k) {
    v.push_back({0.5 * period_s * static_cast<double>(k), 0.5 * period_s * static_cast<double>(k + 1),
                 k % 2 == 0 ? Phase::In : Phase::Ex});
  }
  return RespIntervals(std::move(v), period_s);
}

std::size_t full_breaths(const RespIntervals& iv) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < iv.size(); ++i) n += iv[i].phase == Phase::In ? 1 : 0;
  return n;
}

TEST(DetectIntervals, SineBelt) {
  const auto iv = detect_resp_intervals(test::sine_belt(4.3, 60.0));
  EXPECT_NEAR(static_cast<double>(full_breaths(iv)), 13.0, 1.0);
  for (const auto& i : iv.intervals()) EXPECT_NEAR(i.end_s - i.start_s, 2.15, 0.08);
  EXPECT_NEAR(iv.mean_period_s(), 4.3, 0.05);
  // Trough to peak of -cos is the rising half: inspiration.
  const auto first = iv[0];
  EXPECT_EQ(first.phase, std::fmod(first.start_s + 0.01, 4.3) < 2.15 ? Phase::In : Phase::Ex);
}

TEST(DetectIntervals, Alternation) {
  const auto iv = detect_resp_intervals(test::sine_belt(3.7, 90.0));
  for (std::size_t i = 1; i < iv.size(); ++i) {
    EXPECT_NE(iv[i].phase, iv[i - 1].phase);
    EXPECT_EQ(iv[i].start_s, iv[i - 1].end_s);
  }
}

TEST(DetectIntervals, InvertedBeltSwapsPhases) {
  const auto belt = test::sine_belt(4.3, 60.0);
  const auto a = detect_resp_intervals(belt);
  const auto b = detect_resp_intervals(belt, {.invert = true});
  for (double t = 5.0; t < 55.0; t += 0.25) {
    const auto la = a.phase_at(t);
    const auto lb = b.phase_at(t);
    if (la == PhaseLabel::Unlabeled || lb == PhaseLabel::Unlabeled) continue;
    EXPECT_NE(la, lb) << t;
  }
}

TEST(DetectIntervals, ConstantBelt) {
  expect_error(ErrorCode::NoBreathsDetected, [] {
    detect_resp_intervals(test::make_signal(0.075, std::vector<double>(800, 2.0), SignalKind::Respiration));
  });
}

TEST(DetectIntervals, WrongKindAndShort) {
  auto flow = test::sine_belt(4.3, 60.0);
  flow.kind = SignalKind::Flow;
  expect_error(ErrorCode::InvalidArgument, [&] { detect_resp_intervals(flow); });
  expect_error(ErrorCode::TooShort, [] { detect_resp_intervals(test::sine_belt(4.3, 2.5)); });
}

TEST(DetectIntervals, NoiseRobust) {
  const auto clean = test::sine_belt(4.3, 60.0);
  const std::size_t expected = detect_resp_intervals(clean).size();
  int agree = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1 * 2.0);  // range of -cos is 2
    auto noisy = clean;
    for (double& v : noisy.values) v += noise(rng);
    if (detect_resp_intervals(noisy).size() == expected) ++agree;
  }
  EXPECT_GE(agree, 95);
}

TEST(DetectIntervals, RoundedSquareBelt) {
  synth::SimConfig c;
  c.duration_s = 60.0;
  c.respiration.belt_waveform = synth::BeltWaveform::RoundedSquare;
  const auto iv = detect_resp_intervals(synth::generate_signals(c).resp);
  EXPECT_NEAR(iv.mean_period_s(), 4.3, 0.1);
  for (const auto& i : iv.intervals()) EXPECT_NEAR(i.end_s - i.start_s, 2.15, 0.3);
}

TEST(Intervals, RejectsMalformed) {
  expect_error(ErrorCode::NoBreathsDetected, [] { RespIntervals({}, 4.3); });
  expect_error(ErrorCode::NonAlternating,
               [] { RespIntervals({{0.0, 2.0, Phase::In}, {2.0, 4.0, Phase::In}}, 4.0); });
  expect_error(ErrorCode::InvalidArgument,
               [] { RespIntervals({{0.0, 2.0, Phase::In}, {2.5, 4.0, Phase::Ex}}, 4.0); });
  expect_error(ErrorCode::InvalidArgument,
               [] { RespIntervals({{0.0, 2.0, Phase::In}, {2.0, 2.5, Phase::Ex}}, 4.0); });
}

TEST(Shift, ZeroIsIdentity) {
  const auto iv = detect_resp_intervals(test::sine_belt(4.3, 60.0));
  EXPECT_EQ(shift_intervals(iv, 0.0).intervals(), iv.intervals());
  EXPECT_EQ(shift_intervals(iv, 0.0).mean_period_s(), iv.mean_period_s());
}

TEST(Shift, MovesEveryBoundary) {
  const auto iv = detect_resp_intervals(test::sine_belt(4.3, 60.0));
  const auto s = shift_intervals(iv, 1.2);
  ASSERT_EQ(s.size(), iv.size());
  for (std::size_t i = 0; i < iv.size(); ++i) {
    EXPECT_EQ(s[i].start_s, iv[i].start_s + 1.2);
    EXPECT_EQ(s[i].end_s, iv[i].end_s + 1.2);
    EXPECT_EQ(s[i].phase, iv[i].phase);
  }
  EXPECT_EQ(s.mean_period_s(), iv.mean_period_s());
  expect_error(ErrorCode::InvalidArgument, [&] { shift_intervals(iv, -0.1); });
}

TEST(Shift, Composition) {
  const auto iv = detect_resp_intervals(test::sine_belt(4.3, 60.0));
  for (const double a : {0.075, 0.3, 1.2}) {
    for (const double b : {0.0, 0.15, 2.925}) {
      EXPECT_EQ(shift_intervals(shift_intervals(iv, a), b), shift_intervals(iv, a + b));
    }
  }
}

TEST(Shift, PeriodicTrainLabelsRepeat) {
  const double period = 4.3;
  const auto train = periodic_train(period, 40);
  std::vector<cycles::CCFC> cs;
  for (double t = 0.0; t + 0.94 < 86.0; t += 0.94) cs.push_back(cycle_at(t, t + 0.94));
  for (const double d : {0.0, 0.6, 1.2, 3.0}) {
    const auto a = label_cycles(cs, shift_intervals(train, d));
    const auto b = label_cycles(cs, shift_intervals(train, d + period));
    std::size_t compared = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (a[i] == PhaseLabel::Unlabeled || b[i] == PhaseLabel::Unlabeled) continue;
      EXPECT_EQ(a[i], b[i]) << "delay " << d << " cycle " << i;
      ++compared;
    }
    EXPECT_GT(compared, 70U);
  }
}

TEST(Label, MidpointContainment) {
  const RespIntervals iv({{0.0, 2.1, Phase::In}, {2.1, 4.3, Phase::Ex}, {4.3, 6.4, Phase::In}}, 4.3);
  const auto labels = label_cycles({cycle_at(2.5, 3.5), cycle_at(-1.0, 0.5), cycle_at(1.5, 2.6), cycle_at(6.0, 7.0),
                                    cycle_at(1.2, 3.0)},
                                   iv);
  EXPECT_EQ(labels[0], PhaseLabel::Ex);         // midpoint 3.0
  EXPECT_EQ(labels[1], PhaseLabel::Unlabeled);  // midpoint -0.25
  EXPECT_EQ(labels[2], PhaseLabel::In);         // midpoint 2.05
  EXPECT_EQ(labels[3], PhaseLabel::Unlabeled);  // midpoint 6.5
  EXPECT_EQ(labels[4], PhaseLabel::Ex);         // midpoint 2.1, half-open
}

TEST(Label, CountsPartition) {
  const auto iv = shift_intervals(detect_resp_intervals(test::sine_belt(4.3, 60.0)), 1.05);
  std::vector<cycles::CCFC> cs;
  for (double t = 0.0; t + 0.9 < 65.0; t += 0.9) cs.push_back(cycle_at(t, t + 0.9));
  const auto labels = label_cycles(cs, iv);
  ASSERT_EQ(labels.size(), cs.size());
  const auto in = std::count(labels.begin(), labels.end(), PhaseLabel::In);
  const auto ex = std::count(labels.begin(), labels.end(), PhaseLabel::Ex);
  const auto un = std::count(labels.begin(), labels.end(), PhaseLabel::Unlabeled);
  EXPECT_EQ(static_cast<std::size_t>(in + ex + un), cs.size());
  EXPECT_GT(un, 0);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double mid = cs[i].boundary.midpoint_s();
    const bool inside = mid >= iv.span_start_s() && mid < iv.span_end_s();
    EXPECT_EQ(labels[i] == PhaseLabel::Unlabeled, !inside) << mid;
  }
}

TEST(Label, AgreesWithSynthgenTruth) {
  synth::SimConfig c;
  c.duration_s = 120.0;
  c.modulation.mean_flow_pct = 10.0;
  const auto sig = synth::generate_signals(c);
  const auto iv = detect_resp_intervals(sig.resp);
  std::vector<cycles::CCFC> cs;
  for (const auto& t : sig.truth.cycles) cs.push_back(cycle_at(t.start_s, t.end_s));
  const auto labels = label_cycles(cs, iv);
  std::size_t labelled = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (labels[i] == PhaseLabel::Unlabeled) continue;
    ++labelled;
    const auto truth = sig.truth.cycles[i].phase == Phase::In ? PhaseLabel::In : PhaseLabel::Ex;
    agree += labels[i] == truth ? 1 : 0;
  }
  EXPECT_GT(labelled, 110U);
  EXPECT_GE(static_cast<double>(agree), 0.95 * static_cast<double>(labelled));
}

}  // namespace
}  // namespace rtpc::resp
