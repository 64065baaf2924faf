#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bats/observations.hpp"

namespace bats {

struct KdeResult {
  std::vector<double> density;  // one value per eval point
  double bandwidth = 0.0;
  std::string bandwidth_rule;   // "normal-reference" or "user"
  std::size_t n_pooled = 0;
};

/// Gaussian kernel density estimate pooling observations whose day-of-year
/// lies within +-half_window days of `day` (circular distance) across all
/// years. Bandwidth defaults to the normal-reference rule
/// 1.06 sd n^{-1/5}; pass one explicitly to override. Throws
/// insufficient_data_error when the pool is empty.
KdeResult windowed_kde(const ObservationSeries& data, double day, int half_window,
                       const std::vector<double>& eval_points,
                       std::optional<double> bandwidth = std::nullopt);

}  // namespace bats
