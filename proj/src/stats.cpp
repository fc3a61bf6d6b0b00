#include "rtpc/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "rtpc/error.hpp"

namespace rtpc::stats {
namespace {

// Average ranks doubled, which are always integers.
std::vector<std::int64_t> doubled_ranks(std::span<const double> values) {
  const auto r = average_ranks(values);
  std::vector<std::int64_t> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = std::llround(2.0 * r[i]);
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "spearman needs equal-length inputs");
  const std::size_t n = x.size();
  if (n < 3) fail(ErrorCode::TooFewSamples, "spearman needs at least 3 pairs");

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  auto all_tied = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  if (all_tied(rx) || all_tied(ry)) fail(ErrorCode::ZeroVariance, "all values tied in one variable");

  CorrelationResult out;
  out.n = n;
  out.rho = pearson(rx, ry);

  if (n <= kSpearmanExactMaxN) {
    // |n * sum(X Y) - sum(X) sum(Y)| is proportional to |rho| for any
    // permutation of Y, and is an exact integer on doubled ranks.
    const auto ix = doubled_ranks(x);
    auto iy = doubled_ranks(y);
    const std::int64_t sx = std::accumulate(ix.begin(), ix.end(), std::int64_t{0});
    const std::int64_t sy = std::accumulate(iy.begin(), iy.end(), std::int64_t{0});
    const auto nn = static_cast<std::int64_t>(n);
    auto stat = [&](const std::vector<std::int64_t>& yy) {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < n; ++i) s += ix[i] * yy[i];
      const std::int64_t v = nn * s - sx * sy;
      return v < 0 ? -v : v;
    };
    const std::int64_t observed = stat(iy);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::int64_t> permuted(n);
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
    do {
      for (std::size_t i = 0; i < n; ++i) permuted[i] = iy[perm[i]];
      if (stat(permuted) >= observed) ++hits;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
    out.method = CorrelationMethod::ExactPermutation;
  } else {
    const double dof = static_cast<double>(n - 2);
    double p = 0.0;
    if (std::abs(out.rho) < 1.0) {
      const double t = out.rho * std::sqrt(dof / ((1.0 - out.rho) * (1.0 + out.rho)));
      const boost::math::students_t_distribution<double> dist(dof);
      p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    out.p_value = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
    out.method = CorrelationMethod::TApproximation;
  }
  return out;
}

SignedRankResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "wilcoxon needs equal-length inputs");
  if (x.empty()) fail(ErrorCode::TooFewSamples, "wilcoxon needs at least one pair");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) fail(ErrorCode::AllZeroDifferences, "all paired differences are zero");

  const std::size_t n = diffs.size();
  std::vector<double> magnitudes(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::abs(diffs[i]);
  const auto ranks2 = doubled_ranks(magnitudes);

  std::int64_t plus2 = 0;
  std::int64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += ranks2[i];
    if (diffs[i] > 0.0) plus2 += ranks2[i];
  }
  const std::int64_t w2 = std::min(plus2, total2 - plus2);

  SignedRankResult out;
  out.n_nonzero = n;
  out.w_statistic = static_cast<double>(w2) / 2.0;

  if (n <= kWilcoxonExactMaxN) {
    // Null distribution of the positive-rank sum by subset-sum counting.
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total2) + 1, 0);
    counts[0] = 1;
    std::int64_t reach = 0;
    for (const auto r : ranks2) {
      for (std::int64_t s = reach; s >= 0; --s) {
        if (counts[static_cast<std::size_t>(s)] != 0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      }
      reach += r;
    }
    std::uint64_t extreme = 0;
    for (std::int64_t s = 0; s <= total2; ++s) {
      if (s <= w2 || total2 - s <= w2) extreme += counts[static_cast<std::size_t>(s)];
    }
    out.p_value = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
    out.method = SignedRankMethod::Exact;
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    const auto sorted = [&] {
      auto s = magnitudes;
      std::sort(s.begin(), s.end());
      return s;
    }();
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i + 1;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      var -= (t * t * t - t) / 48.0;
      i = j;
    }
    const double z = (out.w_statistic - mu + 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    out.method = SignedRankMethod::NormalApproximation;
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::Empty, "cannot summarize an empty list");
  const double n = static_cast<double>(values.size());
  Summary s;
  // Centred on the first value so constant inputs give exactly zero spread.
  const double ref = values.front();
  double shift = 0.0;
  for (const double v : values) shift += v - ref;
  shift /= n;
  s.mean = ref + shift;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (const double v : values) ss += (v - ref - shift) * (v - ref - shift);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

}  // namespace rtpc::stats
