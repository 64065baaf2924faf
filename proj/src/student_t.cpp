#include "bats/student_t.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace bats {

namespace {

void check_nu(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw std::domain_error("student_t: degrees of freedom must be positive");
}

boost::math::students_t_distribution<double> dist(double nu) {
  check_nu(nu);
  return boost::math::students_t_distribution<double>(nu);
}

// log(1 + x^2/nu) without overflow of x^2.
double log1p_sq_over(double nu, double x) {
  double ax = std::fabs(x);
  if (ax > 1e150) return 2.0 * std::log(ax) - std::log(nu);
  return std::log1p(x * x / nu);
}

}  // namespace

double student_t_log_pdf(double nu, double x) {
  check_nu(nu);
  double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
             0.5 * std::log(nu * 3.14159265358979323846);
  return c - 0.5 * (nu + 1.0) * log1p_sq_over(nu, x);
}

double student_t_pdf(double nu, double x) { return std::exp(student_t_log_pdf(nu, x)); }

double student_t_cdf(double nu, double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(dist(nu), x);
}

double student_t_survival(double nu, double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(dist(nu), x));
}

double student_t_quantile(double nu, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("student_t_quantile: q must be in (0,1)");
  return boost::math::quantile(dist(nu), q);
}

double student_t_quantile_from_survival(double nu, double s) {
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("student_t_quantile_from_survival: s must be in (0,1)");
  return boost::math::quantile(boost::math::complement(dist(nu), s));
}

double student_t_log_pdf_dx(double nu, double x) {
  check_nu(nu);
  double ax = std::fabs(x);
  if (ax > 1e150) return -(nu + 1.0) / x;
  return -(nu + 1.0) * x / (nu + x * x);
}

double student_t_log_pdf_dnu(double nu, double x) {
  check_nu(nu);
  double L = log1p_sq_over(nu, x);
  double ratio;  // x^2 / (nu + x^2) without overflow
  double ax = std::fabs(x);
  if (ax > 1e150) {
    ratio = 1.0;
  } else {
    ratio = x * x / (nu + x * x);
  }
  return 0.5 * boost::math::digamma(0.5 * (nu + 1.0)) -
         0.5 * boost::math::digamma(0.5 * nu) - 0.5 / nu - 0.5 * L +
         0.5 * (nu + 1.0) / nu * ratio;
}

}  // namespace bats
