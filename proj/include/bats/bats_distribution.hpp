#pragma once

#include <vector>

#include "bats/rng.hpp"

namespace bats {

/// Instantaneous parameters of one bulk-and-tails distribution: a monotone
/// transform H with location/scale/shape per tail, pushed through a
/// Student-t cdf with nu degrees of freedom.
struct BatsParams {
  double nu = 10.0;     // degrees of freedom, > 0
  double phi0 = 0.0;    // lower-tail location
  double phi1 = 0.0;    // upper-tail location
  double tau0 = 1.0;    // lower-tail scale, > 0
  double tau1 = 1.0;    // upper-tail scale, > 0
  double kappa0 = 0.0;  // lower-tail shape
  double kappa1 = 0.0;  // upper-tail shape

  /// Fitting-time constraint kappa_i/nu > -0.5 + margin. Parameter sets
  /// outside the region may still be evaluated; callers that care check here.
  bool shape_constraint_ok(double margin = 0.0) const {
    return kappa0 / nu > -0.5 + margin && kappa1 / nu > -0.5 + margin;
  }
};

/// Throws std::domain_error unless nu, tau0, tau1 are positive and all
/// fields finite.
void validate(const BatsParams& p);

struct Support {
  double lower;  // -inf when kappa0 >= 0
  double upper;  // +inf when kappa1 >= 0
};

/// Support endpoints: upper = phi1 + tau1*softplus_inverse(-1/kappa1) when
/// kappa1 < 0, else +inf; lower mirrored.
Support bats_support(const BatsParams& p);

/// The monotone transform H(x): difference of the two shifted-power terms,
/// with the shape->0 limit taken smoothly (see kKappaLimitEps below).
/// Throws std::domain_error when x is outside the support, naming the
/// violated bound.
double h_transform(const BatsParams& p, double x);

/// dH/dx, analytic; strictly positive inside the support.
double h_derivative(const BatsParams& p, double x);

/// Inverse of h_transform by safeguarded Newton/bisection root finding.
/// Brackets from [phi0 - 50 tau0, phi1 + 50 tau1] intersected with the
/// support shrunk by 1e-12 relative, expanding outward up to 60 times.
/// Throws numerical_error when no bracket is found.
double h_inverse(const BatsParams& p, double z);

/// log density log t_nu(H(x)) + log H'(x); -inf outside the support.
double bats_logpdf(const BatsParams& p, double x);

double bats_pdf(const BatsParams& p, double x);

/// T_nu(H(x)); clamps to 0/1 outside the support.
double bats_cdf(const BatsParams& p, double x);

/// Upper tail probability 1 - cdf, accurate far below 1e-16.
double bats_survival(const BatsParams& p, double x);

/// Quantile H^{-1}(T_nu^{-1}(q)), strictly increasing in q on (0,1).
double bats_quantile(const BatsParams& p, double q);

/// Quantile parameterized by upper tail probability s = 1 - q, usable for
/// s far below double epsilon.
double bats_quantile_from_survival(const BatsParams& p, double s);

/// Inverse-cdf sampling; all draws lie inside the support.
std::vector<double> bats_sample(const BatsParams& p, Rng& rng, std::size_t n);

namespace detail {

/// Shapes with |kappa| below this evaluate the zero-shape limit expression
/// exp(softplus(u)); the implied density is within ~2e-5 in log of the
/// exact one at the threshold, and the branch keeps the log-density exactly
/// continuous at kappa = 0.
inline constexpr double kKappaLimitEps = 1e-5;

/// One tail of the transform evaluated at u = (x-phi)/tau (upper) or
/// (phi-x)/tau (lower).
struct TailParts {
  double u;     // standardized coordinate
  double s;     // softplus(u)
  double sig;   // logistic(u) = d s / d u
  double w;     // 1 + kappa*s (exactly 1 in the limit branch)
  double logG;  // log of the power term
  double B;     // d logG / d kappa (continuity limit inside the snapped branch)
  bool violated;  // w <= 0: x beyond this tail's finite bound
};

TailParts eval_tail(double u, double kappa);

/// Everything the likelihood gradient needs from one density evaluation.
/// Valid only inside the support.
struct PdfParts {
  TailParts t0, t1;
  double sign_z;      // sign of H(x)
  double log_abs_z;   // log |H(x)|, finite even when exp would overflow
  double z;           // H(x) clamped to +-exp(700) for downstream ratios
  double logD0, logD1;  // logs of the two positive terms of H'
  double log_hprime;
  double log_t;       // log t_nu(z)
  double logpdf;
};

/// Returns false when x is outside the support; t0/t1 are always filled so
/// callers can tell which bound was crossed.
bool eval_pdf_parts(const BatsParams& p, double x, PdfParts& parts);

}  // namespace detail

}  // namespace bats
