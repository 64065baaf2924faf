#include "bats/gpd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bats {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this |xi| the exponential limit is exact to double precision.
constexpr double kXiEps = 1e-12;
}  // namespace

void validate(const GpdParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw std::domain_error("GpdParams: sigma must be positive and finite");
  if (!std::isfinite(p.mu) || !std::isfinite(p.xi))
    throw std::domain_error("GpdParams: mu and xi must be finite");
}

double gpd_upper_bound(const GpdParams& p) {
  validate(p);
  return p.xi < 0.0 ? p.mu - p.sigma / p.xi : kInf;
}

double gpd_logpdf(const GpdParams& p, double x) {
  validate(p);
  double z = (x - p.mu) / p.sigma;
  if (z < 0.0) return -kInf;
  if (std::fabs(p.xi) < kXiEps) return -std::log(p.sigma) - z;
  double v = 1.0 + p.xi * z;
  if (!(v > 0.0)) return -kInf;
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * std::log1p(p.xi * z);
}

double gpd_cdf(const GpdParams& p, double x) {
  validate(p);
  double z = (x - p.mu) / p.sigma;
  if (z < 0.0) return 0.0;
  if (std::fabs(p.xi) < kXiEps) return -std::expm1(-z);
  double v = 1.0 + p.xi * z;
  if (!(v > 0.0)) return 1.0;
  return -std::expm1(-std::log1p(p.xi * z) / p.xi);
}

double gpd_quantile(const GpdParams& p, double q) {
  validate(p);
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("gpd_quantile: q must be in (0,1)");
  double l = std::log1p(-q);  // log(1-q)
  if (std::fabs(p.xi) < kXiEps) return p.mu - p.sigma * l;
  return p.mu + p.sigma * std::expm1(-p.xi * l) / p.xi;
}

}  // namespace bats
