#include "rtpc/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"

namespace rtpc::stats {
namespace {

using test::brute_spearman;
using test::brute_wilcoxon;
using test::expect_error;

TEST(Ranks, TiesShareAverage) {
  const std::vector<double> v{10, 20, 20, 5, 20};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2, 4, 4, 1, 4}));
}

TEST(Spearman, PerfectMonotone) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  const auto r = spearman(x, y);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_EQ(r.method, CorrelationMethod::ExactPermutation);
  // Only the identity and the reversal reach |rho| = 1.
  EXPECT_DOUBLE_EQ(r.p_value, 2.0 / 120.0);
}

TEST(Spearman, Reversed) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{10, 8, 6, 4, 2};
  EXPECT_DOUBLE_EQ(spearman(x, y).rho, -1.0);
}

TEST(Spearman, SixWithTiesMatchesEnumeration) {
  const std::vector<double> x{3.1, 1.0, 3.1, 7.5, 2.2, 9.0};
  const std::vector<double> y{1.0, 1.0, 4.0, 6.0, 2.0, 5.0};
  const auto r = spearman(x, y);
  const auto oracle = brute_spearman(x, y);
  EXPECT_NEAR(r.rho, oracle.rho, 1e-12);
  EXPECT_DOUBLE_EQ(r.p_value, oracle.p);
}

TEST(Spearman, TApproximationAboveTen) {
  // Frozen reference values (scipy.stats.spearmanr).
  const std::vector<double> y{70, 29, 85, 61, 80, 34, 60, 31, 73, 66, 12, 58};
  const auto a = spearman(std::vector<double>{17, 86, 60, 77, 47, 3, 70, 87, 88, 92, 41, 55}, y);
  EXPECT_EQ(a.method, CorrelationMethod::TApproximation);
  EXPECT_NEAR(a.rho, 0.07692307692307693, 1e-12);
  EXPECT_NEAR(a.p_value, 0.8121826980280591, 1e-9);
  const auto b = spearman(std::vector<double>{17, 86, 60, 77, 47, 3, 70, 47, 88, 92, 41, 55}, y);
  EXPECT_NEAR(b.rho, 0.2241684698682708, 1e-12);
  EXPECT_NEAR(b.p_value, 0.48366596570100795, 1e-9);
}

TEST(Spearman, PerfectLargeSampleHasPositiveP) {
  std::vector<double> x(30);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const auto r = spearman(x, x);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LT(r.p_value, 1e-12);
}

TEST(Spearman, MonotoneTransformInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (std::size_t n : {5U, 8U, 15U}) {
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = nd(rng);
      y[i] = x[i] + nd(rng);
    }
    auto tx = x;
    for (double& v : tx) v = std::exp(3.0 * v) - 2.0;
    const auto a = spearman(x, y);
    const auto b = spearman(tx, y);
    EXPECT_DOUBLE_EQ(a.rho, b.rho);
    EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
  }
}

TEST(Spearman, Errors) {
  expect_error(ErrorCode::TooFewSamples, [] { spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}); });
  expect_error(ErrorCode::ZeroVariance,
               [] { spearman(std::vector<double>{4, 4, 4}, std::vector<double>{1, 2, 3}); });
  expect_error(ErrorCode::InvalidArgument,
               [] { spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}); });
}

TEST(Spearman, RandomInstancesMatchEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(3, 8);
  std::uniform_int_distribution<int> level(0, 5);  // coarse values force ties
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = static_cast<std::size_t>(size(rng));
    std::vector<double> x(n);
    std::vector<double> y(n);
    do {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = level(rng);
        y[i] = level(rng);
      }
    } while (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
             std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }));
    const auto r = spearman(x, y);
    const auto oracle = brute_spearman(x, y);
    EXPECT_NEAR(r.rho, oracle.rho, 1e-12);
    EXPECT_DOUBLE_EQ(r.p_value, oracle.p) << "n=" << n;
  }
}

TEST(Wilcoxon, AllPositive) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y(5, 0.0);
  const auto r = wilcoxon_signed_rank(x, y);
  EXPECT_DOUBLE_EQ(r.w_statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0625);
  EXPECT_EQ(r.n_nonzero, 5U);
  EXPECT_EQ(r.method, SignedRankMethod::Exact);
}

TEST(Wilcoxon, AllZeroDifferences) {
  const std::vector<double> x{1, 2, 3};
  expect_error(ErrorCode::AllZeroDifferences, [&] { wilcoxon_signed_rank(x, x); });
  expect_error(ErrorCode::TooFewSamples,
               [] { wilcoxon_signed_rank(std::vector<double>{}, std::vector<double>{}); });
}

TEST(Wilcoxon, AntisymmetricDifferences) {
  const std::vector<double> d{-1.5, 1.5, -4.0, 4.0};
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(wilcoxon_signed_rank(d, zero).p_value, 1.0);
}

TEST(Wilcoxon, ZerosDropped) {
  const std::vector<double> x{1, 2, 3, 4, 5, 7, 7};
  const std::vector<double> y{0, 0, 0, 0, 0, 7, 7};
  const auto r = wilcoxon_signed_rank(x, y);
  EXPECT_EQ(r.n_nonzero, 5U);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0625);
}

TEST(Wilcoxon, SwapInvariance) {
  const std::vector<double> x{1.2, 3.4, 2.2, 5.0, 0.1, 7.7, 3.3};
  const std::vector<double> y{0.2, 3.9, 1.0, 4.0, 0.6, 5.5, 3.3};
  const auto a = wilcoxon_signed_rank(x, y);
  const auto b = wilcoxon_signed_rank(y, x);
  EXPECT_DOUBLE_EQ(a.w_statistic, b.w_statistic);
  EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
}

TEST(Wilcoxon, NormalApproximationAboveTwenty) {
  // Frozen reference (scipy.stats.wilcoxon, method='approx', correction=True).
  const std::vector<double> d{1.5, -2, 3.25, 4, -0.5, 6, 7, 7, -9, 10, 11, 12.5, 13,
                              -14, 15, 16, 17, 18, -19, 20, 21, 22, 2, 4, -4};
  const std::vector<double> zero(d.size(), 0.0);
  const auto r = wilcoxon_signed_rank(d, zero);
  EXPECT_EQ(r.method, SignedRankMethod::NormalApproximation);
  EXPECT_DOUBLE_EQ(r.w_statistic, 62.5);
  EXPECT_NEAR(r.p_value, 0.007407098707492079, 1e-12);
}

TEST(Wilcoxon, RandomInstancesMatchEnumeration) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 14);
  std::uniform_int_distribution<int> level(-4, 4);
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = static_cast<std::size_t>(size(rng));
    std::vector<double> x(n);
    std::vector<double> y(n, 0.0);
    do {
      for (double& v : x) v = level(rng);
    } while (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));
    const auto r = wilcoxon_signed_rank(x, y);
    const auto oracle = brute_wilcoxon(x, y);
    EXPECT_EQ(r.n_nonzero, oracle.n);
    EXPECT_DOUBLE_EQ(r.w_statistic, oracle.w);
    EXPECT_DOUBLE_EQ(r.p_value, oracle.p);
  }
}

TEST(Summary, Basics) {
  const auto one = summarize(std::vector<double>{740});
  EXPECT_DOUBLE_EQ(one.mean, 740.0);
  EXPECT_FALSE(one.sd.has_value());

  const auto two = summarize(std::vector<double>{1, 3});
  EXPECT_DOUBLE_EQ(two.mean, 2.0);
  ASSERT_TRUE(two.sd.has_value());
  EXPECT_DOUBLE_EQ(*two.sd, std::sqrt(2.0));

  const auto flat = summarize(std::vector<double>(7, 0.1));
  EXPECT_EQ(*flat.sd, 0.0);
  EXPECT_EQ(flat.mean, 0.1);

  expect_error(ErrorCode::Empty, [] { summarize(std::vector<double>{}); });
}

}  // namespace
}  // namespace rtpc::stats
