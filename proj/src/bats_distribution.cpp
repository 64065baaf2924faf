#include "bats/bats_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bats/errors.hpp"
#include "bats/math.hpp"
#include "bats/student_t.hpp"

namespace bats {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this in log, squaring or exponentiating would overflow; switch to
// log-domain asymptotics.
constexpr double kLogHuge = 350.0;
}  // namespace

void validate(const BatsParams& p) {
  if (!(p.nu > 0.0) || !std::isfinite(p.nu))
    throw std::domain_error("BatsParams: nu must be positive and finite");
  if (!(p.tau0 > 0.0) || !(p.tau1 > 0.0) || !std::isfinite(p.tau0) ||
      !std::isfinite(p.tau1))
    throw std::domain_error("BatsParams: tau0 and tau1 must be positive and finite");
  if (!std::isfinite(p.phi0) || !std::isfinite(p.phi1) ||
      !std::isfinite(p.kappa0) || !std::isfinite(p.kappa1))
    throw std::domain_error("BatsParams: locations and shapes must be finite");
}

Support bats_support(const BatsParams& p) {
  validate(p);
  Support s{-kInf, kInf};
  if (p.kappa1 < 0.0) s.upper = p.phi1 + p.tau1 * softplus_inverse(-1.0 / p.kappa1);
  if (p.kappa0 < 0.0) s.lower = p.phi0 - p.tau0 * softplus_inverse(-1.0 / p.kappa0);
  return s;
}

namespace detail {

TailParts eval_tail(double u, double kappa) {
  TailParts t;
  t.u = u;
  t.s = softplus(u);
  t.sig = logistic(u);
  t.violated = false;
  if (std::fabs(kappa) < kKappaLimitEps) {
    t.w = 1.0;
    t.logG = t.s;
    t.B = t.s * t.s * (-0.5 + (2.0 / 3.0) * kappa * t.s);
    return t;
  }
  t.w = 1.0 + kappa * t.s;
  if (!(t.w > 0.0)) {
    t.violated = true;
    t.logG = kInf;
    t.B = 0.0;
    return t;
  }
  t.logG = std::log1p(kappa * t.s) / kappa;
  if (std::fabs(kappa * t.s) < 1e-3) {
    // The exact form (s/w - logG)/kappa cancels badly here.
    t.B = t.s * t.s * (-0.5 + (2.0 / 3.0) * kappa * t.s);
  } else {
    t.B = (t.s / t.w - t.logG) / kappa;
  }
  return t;
}

bool eval_pdf_parts(const BatsParams& p, double x, PdfParts& out) {
  out.t1 = eval_tail((x - p.phi1) / p.tau1, p.kappa1);
  out.t0 = eval_tail((p.phi0 - x) / p.tau0, p.kappa0);
  if (out.t0.violated || out.t1.violated) return false;

  const double lg1 = out.t1.logG;
  const double lg0 = out.t0.logG;
  if (lg1 < kLogHuge && lg0 < kLogHuge) {
    double z = std::exp(lg1) - std::exp(lg0);
    out.z = z;
    out.sign_z = z >= 0.0 ? 1.0 : -1.0;
    out.log_abs_z = std::log(std::fabs(z));  // -inf when z == 0 is fine below
  } else {
    // One term dominates astronomically; stay in logs.
    double hi = std::max(lg1, lg0), lo = std::min(lg1, lg0);
    out.sign_z = lg1 >= lg0 ? 1.0 : -1.0;
    out.log_abs_z = hi + std::log1p(-std::exp(lo - hi));
    out.z = out.sign_z * std::exp(std::min(out.log_abs_z, 700.0));
  }

  out.logD1 = lg1 + log_logistic(out.t1.u) - std::log(out.t1.w) - std::log(p.tau1);
  out.logD0 = lg0 + log_logistic(out.t0.u) - std::log(out.t0.w) - std::log(p.tau0);
  double dh = std::max(out.logD0, out.logD1), dl = std::min(out.logD0, out.logD1);
  out.log_hprime = dh + std::log1p(std::exp(dl - dh));

  if (out.log_abs_z < kLogHuge) {
    out.log_t = student_t_log_pdf(p.nu, out.z);
  } else {
    // log t_nu(z) ~ const - (nu+1) (log|z| - 0.5 log nu)
    double c = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
               0.5 * std::log(p.nu * 3.14159265358979323846);
    out.log_t = c - (p.nu + 1.0) * (out.log_abs_z - 0.5 * std::log(p.nu));
  }
  out.logpdf = out.log_t + out.log_hprime;
  return true;
}

}  // namespace detail

namespace {

[[noreturn]] void throw_outside(const BatsParams& p, double x, bool upper) {
  Support s = bats_support(p);
  std::ostringstream msg;
  msg << "x = " << x << " outside support: "
      << (upper ? "above upper bound " : "below lower bound ")
      << (upper ? s.upper : s.lower);
  throw std::domain_error(msg.str());
}

struct HAndDeriv {
  double h;
  double hp;
  bool violated;
};

// H and H' without the density bookkeeping; may return +-inf near a finite
// bound, which the root finder treats as an ordinary ordering signal.
HAndDeriv h_raw(const BatsParams& p, double x) {
  detail::TailParts t1 = detail::eval_tail((x - p.phi1) / p.tau1, p.kappa1);
  detail::TailParts t0 = detail::eval_tail((p.phi0 - x) / p.tau0, p.kappa0);
  if (t1.violated) return {kInf, kInf, true};
  if (t0.violated) return {-kInf, kInf, true};
  double g1 = std::exp(t1.logG), g0 = std::exp(t0.logG);
  return {g1 - g0, g1 * t1.sig / (t1.w * p.tau1) + g0 * t0.sig / (t0.w * p.tau0),
          false};
}

}  // namespace

double h_transform(const BatsParams& p, double x) {
  validate(p);
  detail::TailParts t1 = detail::eval_tail((x - p.phi1) / p.tau1, p.kappa1);
  detail::TailParts t0 = detail::eval_tail((p.phi0 - x) / p.tau0, p.kappa0);
  if (t1.violated) throw_outside(p, x, true);
  if (t0.violated) throw_outside(p, x, false);
  return std::exp(t1.logG) - std::exp(t0.logG);
}

double h_derivative(const BatsParams& p, double x) {
  validate(p);
  detail::PdfParts parts;
  if (!detail::eval_pdf_parts(p, x, parts)) {
    detail::TailParts t1 = detail::eval_tail((x - p.phi1) / p.tau1, p.kappa1);
    throw_outside(p, x, t1.violated);
  }
  return std::exp(parts.log_hprime);
}

double h_inverse(const BatsParams& p, double z) {
  validate(p);
  if (!std::isfinite(z)) throw std::domain_error("h_inverse: z must be finite");
  Support sup = bats_support(p);

  auto clamp_in = [&](double v) {
    // Shrink toward the interior by 1e-12 relative so H stays evaluable.
    if (std::isfinite(sup.lower))
      v = std::max(v, sup.lower + 1e-12 * (1.0 + std::fabs(sup.lower)));
    if (std::isfinite(sup.upper))
      v = std::min(v, sup.upper - 1e-12 * (1.0 + std::fabs(sup.upper)));
    return v;
  };
  double lo = clamp_in(p.phi0 - 50.0 * p.tau0);
  double hi = clamp_in(p.phi1 + 50.0 * p.tau1);
  if (lo > hi) std::swap(lo, hi);

  auto H = [&](double x) { return h_raw(p, x).h; };

  double flo = H(lo), fhi = H(hi);
  double step_lo = 50.0 * p.tau0, step_hi = 50.0 * p.tau1;
  int tries = 0;
  while (flo > z && tries < 60) {
    if (std::isfinite(sup.lower)) {
      lo = sup.lower + 0.5 * (lo - sup.lower);
    } else {
      step_lo *= 2.0;
      lo -= step_lo;
    }
    flo = H(lo);
    ++tries;
  }
  while (fhi < z && tries < 60) {
    if (std::isfinite(sup.upper)) {
      hi = sup.upper - 0.5 * (sup.upper - hi);
    } else {
      step_hi *= 2.0;
      hi += step_hi;
    }
    fhi = H(hi);
    ++tries;
  }
  if (flo > z || fhi < z) {
    std::ostringstream msg;
    msg << "h_inverse: failed to bracket z = " << z << " after " << tries
        << " expansions; interval [" << lo << ", " << hi << "] gives H in ["
        << flo << ", " << fhi << "]";
    throw numerical_error(msg.str());
  }

  const double ztol = 1e-10 * std::max(1.0, std::fabs(z));
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    HAndDeriv hd = h_raw(p, x);
    double f = hd.h - z;
    if (std::fabs(f) <= ztol) return x;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double width = hi - lo;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() *
                     (std::fabs(lo) + std::fabs(hi) + 1e-300))
      return x;
    double xn = x - f / hd.hp;
    if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return x;
}

double bats_logpdf(const BatsParams& p, double x) {
  validate(p);
  detail::PdfParts parts;
  if (!detail::eval_pdf_parts(p, x, parts)) return -kInf;
  return parts.logpdf;
}

double bats_pdf(const BatsParams& p, double x) { return std::exp(bats_logpdf(p, x)); }

double bats_cdf(const BatsParams& p, double x) {
  validate(p);
  detail::PdfParts parts;
  if (!detail::eval_pdf_parts(p, x, parts)) {
    detail::TailParts t1 = detail::eval_tail((x - p.phi1) / p.tau1, p.kappa1);
    return t1.violated ? 1.0 : 0.0;
  }
  if (parts.log_abs_z >= kLogHuge) return parts.sign_z > 0.0 ? 1.0 : 0.0;
  return student_t_cdf(p.nu, parts.z);
}

double bats_survival(const BatsParams& p, double x) {
  validate(p);
  detail::PdfParts parts;
  if (!detail::eval_pdf_parts(p, x, parts)) {
    detail::TailParts t1 = detail::eval_tail((x - p.phi1) / p.tau1, p.kappa1);
    return t1.violated ? 0.0 : 1.0;
  }
  if (parts.log_abs_z < kLogHuge) return student_t_survival(p.nu, parts.z);
  if (parts.sign_z < 0.0) return 1.0;
  // Survival ~ c nu^{nu/2 - 1} z^{-nu} for huge z, computed in logs.
  double logc = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
                0.5 * std::log(p.nu * 3.14159265358979323846) - std::log(p.nu) +
                (0.5 * p.nu + 0.5) * std::log(p.nu);
  return std::exp(logc - p.nu * parts.log_abs_z);
}

double bats_quantile(const BatsParams& p, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("bats_quantile: q must be in (0,1)");
  return h_inverse(p, student_t_quantile(p.nu, q));
}

double bats_quantile_from_survival(const BatsParams& p, double s) {
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("bats_quantile_from_survival: s must be in (0,1)");
  return h_inverse(p, student_t_quantile_from_survival(p.nu, s));
}

std::vector<double> bats_sample(const BatsParams& p, Rng& rng, std::size_t n) {
  validate(p);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(bats_quantile(p, rng.uniform_open01()));
  return out;
}

}  // namespace bats
