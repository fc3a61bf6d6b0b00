#pragma once

#include <vector>

namespace rtpc {

// Order statistics on a copy of the data. Both require a non-empty input.

/// Median; mean of the two central values for even sizes.
double median(std::vector<double> values);

/// Linearly interpolated quantile, q in [0, 1] (R type 7).
double quantile(std::vector<double> values, double q);

}  // namespace rtpc
