#include "bats/skew_normal.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/owens_t.hpp>

#include "bats/math.hpp"

namespace bats {

void validate(const SkewNormalParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw std::domain_error("SkewNormalParams: sigma must be positive and finite");
  if (!std::isfinite(p.mu) || !std::isfinite(p.alpha))
    throw std::domain_error("SkewNormalParams: mu and alpha must be finite");
}

double skew_normal_logpdf(const SkewNormalParams& p, double x) {
  validate(p);
  double t = (x - p.mu) / p.sigma;
  return std::log(2.0 / p.sigma) + normal_log_pdf(t) + log_normal_cdf(p.alpha * t);
}

double skew_normal_pdf(const SkewNormalParams& p, double x) {
  return std::exp(skew_normal_logpdf(p, x));
}

double skew_normal_cdf(const SkewNormalParams& p, double x) {
  validate(p);
  double t = (x - p.mu) / p.sigma;
  double c = normal_cdf(t) - 2.0 * boost::math::owens_t(t, p.alpha);
  if (c < 0.0) return 0.0;
  if (c > 1.0) return 1.0;
  return c;
}

}  // namespace bats
