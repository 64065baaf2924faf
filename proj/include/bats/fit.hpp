#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bats/likelihood.hpp"
#include "bats/observations.hpp"
#include "bats/seasonal_model.hpp"

namespace bats {

struct FitConfig {
  std::size_t max_iterations = 500;
  /// Convergence declared when |grad|_inf <= gradient_tolerance * max(1, |nll|).
  double gradient_tolerance = 1e-6;
  /// Log-scale intercept values profiled as alternative starts.
  std::vector<double> scale_intercept_grid = {-1.0, 0.0, 1.0, 2.0};
  /// Margin keeping kappa_i / nu strictly above -0.5.
  double constraint_margin = 1e-3;
  /// Tiny ridge on the linear coefficient blocks. The partition-of-unity
  /// basis leaves the intercepts unidentified against their spline blocks;
  /// the ridge pins that flat direction without measurably moving any
  /// identified coefficient. Reported likelihoods exclude it.
  double coefficient_ridge = 1e-7;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct FitDiagnostics {
  double neg_loglik = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;           // inf-norm in the optimizer space
  std::vector<double> init_used;        // natural coefficients of the winning start
  std::size_t support_violations = 0;   // at the optimum; 0 for a clean fit
  std::string message;
};

struct BatsFitResult {
  SeasonalBatsModel model;
  FitDiagnostics diag;
};

struct SkewFitResult {
  SeasonalSkewNormalModel model;
  FitDiagnostics diag;
};

struct GpdFitResult {
  SeasonalGpdModel model;
  FitDiagnostics diag;
  std::size_t n_exceedances = 0;
};

/// Maximum likelihood fit of the seasonal bulk-and-tails model.
/// Initialization: nu = 10, shapes and trend coefficients zero, location
/// splines from least squares (the two location curves offset by -/+ one
/// residual standard deviation), log-scale splines zero with the intercept
/// profiled over config.scale_intercept_grid. The shape constraint
/// kappa_i/nu > -0.5 + margin is enforced by a smooth reparameterization so
/// the inner optimizer is unconstrained. Weights, when given, multiply each
/// observation's log-likelihood term (bootstrap year multiplicities).
/// `warm_start` overrides the initialization scheme entirely.
BatsFitResult fit_bats(const ObservationSeries& data, const FitConfig& config,
                       std::span<const double> weights = {},
                       const SeasonalBatsModel* warm_start = nullptr);

SkewFitResult fit_skew_normal(const ObservationSeries& data, const FitConfig& config,
                              std::span<const double> weights = {},
                              const SeasonalSkewNormalModel* warm_start = nullptr);

/// GPD over threshold exceedances. The threshold curve mu(d) comes from a
/// quantile regression of the (negated, for Tail::lower) values on the
/// spline basis at level p_mu and is frozen before likelihood fitting.
/// Throws insufficient_data_error with fewer than 50 exceedances.
GpdFitResult fit_gpd(const ObservationSeries& data, Tail tail, double p_mu,
                     const FitConfig& config, std::span<const double> weights = {},
                     const SeasonalGpdModel* warm_start = nullptr);

/// Fit-space (unconstrained) <-> natural parameter transform for the shape
/// block: kappa_i = (nu/2) (softplus(theta_i) - 1 + margin), nu = exp(theta_nu).
std::vector<double> bats_natural_to_fit(std::span<const double> natural, double margin);
std::vector<double> bats_fit_to_natural(std::span<const double> fit, double margin);

/// The default initialization at one profiled log-scale intercept: location
/// splines from least squares offset by -/+ one residual standard deviation,
/// zero trend and shape coefficients, nu 10.
SeasonalBatsModel bats_default_init(const ObservationSeries& data,
                                    double scale_intercept);

}  // namespace bats
