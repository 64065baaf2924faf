#include "bats/math.hpp"

#include <boost/math/distributions/normal.hpp>

namespace bats {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;
}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_cdf(double x) {
  if (x > -20.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Asymptotic series for log Phi(x), x << 0:
  //   Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  double inv2 = 1.0 / (x * x);
  double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2));
  return normal_log_pdf(x) - std::log(-x) + std::log(series);
}

double inverse_mills(double x) {
  return std::exp(normal_log_pdf(x) - log_normal_cdf(x));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  static const boost::math::normal_distribution<double> n01(0.0, 1.0);
  return boost::math::quantile(n01, p);
}

}  // namespace bats
