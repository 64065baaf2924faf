#pragma once

#include <cmath>
#include <stdexcept>

namespace bats {

/// Smooth hinge log(1 + e^x), overflow-safe: ~x for large x, ~e^x for
/// very negative x.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Inverse of softplus, log(e^y - 1) for y > 0.
inline double softplus_inverse(double y) {
  if (!(y > 0.0)) throw std::domain_error("softplus_inverse: y must be > 0");
  if (y > 36.0) return y;  // e^-y below double resolution of y
  return std::log(std::expm1(y));
}

/// Logistic sigmoid, the derivative of softplus.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// log of the logistic sigmoid: -softplus(-x).
inline double log_logistic(double x) { return -softplus(-x); }

/// Standard normal pdf and its log.
double normal_pdf(double x);
double normal_log_pdf(double x);

/// Standard normal cdf via erfc; accurate in both tails.
double normal_cdf(double x);

/// log Phi(x), finite for arbitrarily negative x (asymptotic expansion in
/// the far lower tail where erfc underflows).
double log_normal_cdf(double x);

/// phi(x)/Phi(x); stable for very negative x where both factors vanish.
double inverse_mills(double x);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace bats
