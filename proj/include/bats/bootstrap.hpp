#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bats/observations.hpp"
#include "bats/rng.hpp"

namespace bats {

/// Stratified year-block bootstrap: whole years are resampled with
/// replacement within calendar decades, preserving each decade's year count.
struct BootstrapPlan {
  std::size_t n_replicates = 200;
  std::uint64_t rng_seed = 0;

  static int decade_of(int year) {
    // Calendar decades (1940s, 1950s, ...), correct for negatives too.
    int d = year - (((year % 10) + 10) % 10);
    return d;
  }
};

/// Draws, for each decade, that decade's original count of years uniformly
/// with replacement from the decade's years; result is ordered by decade,
/// draws kept in drawing order.
std::vector<int> stratified_resample(const std::vector<int>& years,
                                     const BootstrapPlan& plan, Rng& rng);

/// Per-replicate refit outcome: the functional values plus a convergence flag.
struct ReplicateFit {
  bool converged = false;
  std::vector<double> functionals;
};

/// Refits one resampled dataset. The weights give each observation's year
/// multiplicity (a year drawn twice contributes its log-likelihood terms
/// twice); refits conventionally warm-start from the full-data optimum.
using RefitFn = std::function<ReplicateFit(const ObservationSeries& data,
                                           std::span<const double> weights)>;

struct BootstrapResult {
  std::vector<std::vector<double>> replicate_values;  // n_replicates x dim
  std::vector<bool> converged;
  std::size_t n_failed = 0;
};

/// Runs the full bootstrap: each replicate draws its year multiset from its
/// own pre-seeded stream (so execution order cannot change results), builds
/// per-observation weights, and calls refit. Non-converged replicates are
/// flagged, never dropped from the result.
BootstrapResult bootstrap_fits(const ObservationSeries& data, const BootstrapPlan& plan,
                               const RefitFn& refit);

/// Percentile confidence interval by linear interpolation between order
/// statistics (position h = (n-1) p + 1). Requires at least 20 values.
std::pair<double, double> percentile_ci(std::vector<double> values, double level);

/// CI computation over a bootstrap result: non-converged replicates are
/// excluded from the percentiles but counted; when more than 10% failed the
/// interval is flagged unreliable.
struct FunctionalCi {
  double lo = 0.0;
  double hi = 0.0;
  bool reliable = true;
  std::size_t n_used = 0;
};

std::vector<FunctionalCi> bootstrap_cis(const BootstrapResult& result, double level);

}  // namespace bats
