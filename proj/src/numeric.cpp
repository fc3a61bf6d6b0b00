#include "rtpc/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "rtpc/error.hpp"

namespace rtpc {

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::Empty, "median of empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return lower + 0.5 * (upper - lower);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::Empty, "quantile of empty set");
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto lo_it = values.begin() + static_cast<std::ptrdiff_t>(lo);
  std::nth_element(values.begin(), lo_it, values.end());
  const double a = *lo_it;
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(lo_it + 1, values.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

}  // namespace rtpc
