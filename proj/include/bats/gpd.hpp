#pragma once

namespace bats {

/// Generalized Pareto over excesses above a user-specified threshold mu.
struct GpdParams {
  double mu = 0.0;     // threshold
  double sigma = 1.0;  // scale, > 0
  double xi = 0.0;     // shape; zero handled as the exponential limit
};

void validate(const GpdParams& p);

/// Support is [mu, mu - sigma/xi] for xi < 0, [mu, inf) otherwise.
double gpd_upper_bound(const GpdParams& p);

/// -inf outside the support.
double gpd_logpdf(const GpdParams& p, double x);

/// Clamped to 0 below mu and to 1 above a finite upper bound.
double gpd_cdf(const GpdParams& p, double x);

double gpd_quantile(const GpdParams& p, double q);

}  // namespace bats
