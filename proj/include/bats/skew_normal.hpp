#pragma once

namespace bats {

struct SkewNormalParams {
  double mu = 0.0;     // location
  double sigma = 1.0;  // scale, > 0
  double alpha = 0.0;  // skewness
};

void validate(const SkewNormalParams& p);

/// log of (2/sigma) phi((x-mu)/sigma) Phi(alpha (x-mu)/sigma).
double skew_normal_logpdf(const SkewNormalParams& p, double x);

double skew_normal_pdf(const SkewNormalParams& p, double x);

/// Closed form via Owen's T: Phi(t) - 2 T(t, alpha).
double skew_normal_cdf(const SkewNormalParams& p, double x);

}  // namespace bats
