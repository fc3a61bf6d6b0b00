#pragma once

// Slow reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace rtpc::test {

/// Rank by counting: #smaller + (#equal + 1) / 2.
inline std::vector<double> counting_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (const double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

struct BruteSpearman {
  double rho;
  double p;
};

/// Two-sided p over all n! re-orderings of y.
inline BruteSpearman brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = counting_ranks(x);
  const auto ry = counting_ranks(y);
  const double rho = pearson_r(rx, ry);
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> perm(y.size());
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = ry[idx[i]];
    if (std::abs(pearson_r(rx, perm)) >= std::abs(rho) - 1e-9) ++hits;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return {rho, static_cast<double>(hits) / static_cast<double>(total)};
}

struct BruteWilcoxon {
  double w;
  double p;
  std::size_t n;
};

/// Two-sided p over all 2^n sign assignments of the ranked non-zero differences.
inline BruteWilcoxon brute_wilcoxon(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  }
  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const auto r = counting_ranks(mag);
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  double plus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0) plus += r[i];
  }
  const double w = std::min(plus, total - plus);
  std::uint64_t hits = 0;
  const std::uint64_t patterns = std::uint64_t{1} << d.size();
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (mask >> i & 1U) s += r[i];
    }
    if (std::min(s, total - s) <= w + 1e-9) ++hits;
  }
  return {w, static_cast<double>(hits) / static_cast<double>(patterns), d.size()};
}

}  // namespace rtpc::test
