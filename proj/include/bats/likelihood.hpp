#pragma once

#include <span>
#include <vector>

#include "bats/observations.hpp"
#include "bats/seasonal_model.hpp"

namespace bats {

/// Per-observation covariate rows, precomputed once per dataset because the
/// likelihood is evaluated thousands of times during optimization and
/// bootstrap. Weights carry bootstrap year multiplicities (1 by default).
struct ObsDesign {
  int n_basis = 0;
  std::vector<double> x;       // observed values
  std::vector<double> weight;
  std::vector<double> spline;  // size m * n_basis, row-major
  std::vector<double> C;       // covariate value of the observation year
  std::vector<double> cosd, sind;
  std::vector<double> day;     // day-of-year, kept for threshold curves

  std::size_t size() const { return x.size(); }

  static ObsDesign build(const ObservationSeries& data, const PeriodicSplineBasis& basis,
                         std::span<const double> weights = {});
};

/// Natural coefficient vector layouts. For the bulk-and-tails model with an
/// n-function basis (4n + 13 entries, 45 for n = 8):
///   [loc_lower (n+4)] [loc_upper (n+4)] [scale_lower (n+1)] [scale_upper (n+1)]
///   [kappa0] [kappa1] [log_nu]
/// where each location block is (intercept, splines..., trend, trend_cos,
/// trend_sin) and each scale block is (intercept, splines...).
std::vector<double> pack_bats(const SeasonalBatsModel& m);
void unpack_bats(std::span<const double> v, SeasonalBatsModel& m);

/// Skew-normal layout: [loc (n+4)] [log_scale (n+1)] [skew (n+1)].
std::vector<double> pack_skew(const SeasonalSkewNormalModel& m);
void unpack_skew(std::span<const double> v, SeasonalSkewNormalModel& m);

/// GPD layout (threshold curve is frozen, not part of the vector):
/// [log_scale (n+4)] [xi].
std::vector<double> pack_gpd(const SeasonalGpdModel& m);
void unpack_gpd(std::span<const double> v, SeasonalGpdModel& m);

/// Negative log likelihood machinery shared by the public entry points and
/// the optimizer. Violation handling: "infinite" mode returns +inf as soon
/// as an observation leaves the instantaneous support; "penalty" mode
/// substitutes a smooth quadratic barrier so line searches stay informative.
class BatsLikelihood {
 public:
  enum class OnViolation { infinite, penalty };

  BatsLikelihood(ObsDesign design, OnViolation mode);

  std::size_t n_params() const { return static_cast<std::size_t>(4 * design_.n_basis + 13); }

  /// Negative log likelihood at the natural coefficient vector; fills the
  /// gradient when grad is non-null (resized to n_params). n_violations, if
  /// given, receives the count of out-of-support observations.
  double eval(std::span<const double> natural, std::vector<double>* grad,
              std::size_t* n_violations = nullptr) const;

  /// Empirical Fisher diagonal sum_i w_i (d lp_i / d theta_j)^2, used as a
  /// curvature preconditioner by the optimizer.
  std::vector<double> fisher_diag(std::span<const double> natural) const;

  const ObsDesign& design() const { return design_; }

 private:
  double eval_impl(std::span<const double> natural, std::vector<double>* grad,
                   std::size_t* n_violations, std::vector<double>* fisher) const;

  ObsDesign design_;
  OnViolation mode_;
};

class SkewNormalLikelihood {
 public:
  explicit SkewNormalLikelihood(ObsDesign design);
  std::size_t n_params() const { return static_cast<std::size_t>(3 * design_.n_basis + 6); }
  double eval(std::span<const double> natural, std::vector<double>* grad) const;
  std::vector<double> fisher_diag(std::span<const double> natural) const;
  const ObsDesign& design() const { return design_; }

 private:
  double eval_impl(std::span<const double> natural, std::vector<double>* grad,
                   std::vector<double>* fisher) const;

  ObsDesign design_;
};

/// Likelihood over threshold excesses. The design rows belong to the
/// exceeding observations only and x holds the excesses.
class GpdLikelihood {
 public:
  GpdLikelihood(ObsDesign excess_design, BatsLikelihood::OnViolation mode);
  std::size_t n_params() const { return static_cast<std::size_t>(design_.n_basis + 5); }
  double eval(std::span<const double> natural, std::vector<double>* grad,
              std::size_t* n_violations = nullptr) const;
  std::vector<double> fisher_diag(std::span<const double> natural) const;
  const ObsDesign& design() const { return design_; }

 private:
  double eval_impl(std::span<const double> natural, std::vector<double>* grad,
                   std::size_t* n_violations, std::vector<double>* fisher) const;

  ObsDesign design_;
  BatsLikelihood::OnViolation mode_;
};

/// Sum of -log f(x_i) under the seasonal model; +inf when any observation
/// falls outside its instantaneous support. Throws std::out_of_range when
/// the covariate misses an observation year.
double bats_negloglik(const SeasonalBatsModel& m, const ObservationSeries& data);

/// Gradient with respect to the natural coefficient vector (pack_bats
/// order). Requires every observation strictly inside its support and the
/// shape constraint strictly satisfied; throws std::domain_error otherwise.
std::vector<double> negloglik_gradient(const SeasonalBatsModel& m,
                                       const ObservationSeries& data);

double skew_negloglik(const SeasonalSkewNormalModel& m, const ObservationSeries& data);

}  // namespace bats
