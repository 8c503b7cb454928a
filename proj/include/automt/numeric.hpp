#pragma once

#include "automt/error.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace automt
{

/// Median with the even-length convention (mean of the two middle values).
inline double median(std::span<const double> values)
{
  if (values.empty()) throw EmptySeries("median of an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace automt
