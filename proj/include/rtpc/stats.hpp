#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rtpc::stats {

enum class CorrelationMethod { ExactPermutation, TApproximation };
enum class SignedRankMethod { Exact, NormalApproximation };

inline constexpr std::size_t kSpearmanExactMaxN = 10;
inline constexpr std::size_t kWilcoxonExactMaxN = 20;

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  CorrelationMethod method = CorrelationMethod::ExactPermutation;
};

struct SignedRankResult {
  double w_statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;      // two-sided
  std::size_t n_nonzero = 0;
  SignedRankMethod method = SignedRankMethod::Exact;
};

struct Summary {
  double mean = 0.0;
  std::optional<double> sd;  // sample SD; empty for n == 1
};

/// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation. Two-sided p by full permutation of the ranks
/// for n <= 10, otherwise Student t with n - 2 degrees of freedom.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Wilcoxon signed-rank test on x - y (zero differences dropped). Exact
/// null distribution for up to 20 non-zero differences, otherwise normal
/// approximation with tie and continuity correction.
SignedRankResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

Summary summarize(std::span<const double> values);

}  // namespace rtpc::stats
