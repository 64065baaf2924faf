#include "bats/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include "bats/errors.hpp"
#include "bats/lbfgs.hpp"
#include "bats/math.hpp"
#include "bats/quantile_regression.hpp"

namespace bats {

void FitConfig::validate() const {
  if (!(gradient_tolerance > 0.0)) throw config_error("FitConfig: gradient_tolerance must be > 0");
  if (!(constraint_margin > 0.0)) throw config_error("FitConfig: constraint_margin must be > 0");
  if (max_iterations == 0) throw config_error("FitConfig: max_iterations must be > 0");
  if (!(coefficient_ridge >= 0.0)) throw config_error("FitConfig: coefficient_ridge must be >= 0");
  if (scale_intercept_grid.empty())
    throw config_error("FitConfig: scale_intercept_grid must be nonempty");
}

// ---------------------------------------------------------------------------
// Shape-constraint reparameterization

std::vector<double> bats_natural_to_fit(std::span<const double> natural, double margin) {
  std::vector<double> fit(natural.begin(), natural.end());
  const std::size_t k0 = natural.size() - 3;
  const double nu = std::exp(natural[k0 + 2]);
  for (int i = 0; i < 2; ++i) {
    double ratio = 2.0 * natural[k0 + i] / nu + 1.0 - margin;
    if (!(ratio > 0.0))
      throw std::domain_error("shape parameters violate kappa/nu > -0.5 + margin");
    fit[k0 + i] = softplus_inverse(ratio);
  }
  return fit;
}

std::vector<double> bats_fit_to_natural(std::span<const double> fit, double margin) {
  std::vector<double> natural(fit.begin(), fit.end());
  const std::size_t k0 = fit.size() - 3;
  const double nu = std::exp(fit[k0 + 2]);
  for (int i = 0; i < 2; ++i)
    natural[k0 + i] = 0.5 * nu * (softplus(fit[k0 + i]) - 1.0 + margin);
  return natural;
}

namespace {

// Objectives are optimized in a diagonally rescaled space: coordinate j of
// the optimizer maps to scale_j * x_j in fit space, with scale_j chosen
// from the empirical Fisher diagonal so curvature is O(1) in every
// direction. Without this, spline/location coordinates carry second
// derivatives 4-5 orders of magnitude above the shape coordinates and
// line searches collapse.

using FitSpaceFn = std::function<double(std::span<const double>, std::vector<double>*)>;

std::vector<double> scale_from_fisher(const std::vector<double>& fisher) {
  double top = 0.0;
  for (double v : fisher) top = std::max(top, v);
  const double floor = 1e-6 * top + 1e-12;
  std::vector<double> scale(fisher.size());
  for (std::size_t i = 0; i < fisher.size(); ++i)
    scale[i] = 1.0 / std::sqrt(std::max(fisher[i], floor));
  return scale;
}

// The partition-of-unity spline basis makes each intercept collinear with
// its spline block (and, for a flat covariate, with the trend level), so
// the likelihood has exactly flat directions along which quasi-Newton
// steps can drift to offsetting coefficients of enormous magnitude. A tiny
// ridge on the linear blocks pins those directions; the reported
// likelihood is re-evaluated without it.
FitSpaceFn with_ridge(FitSpaceFn inner, std::size_t n_linear, double lambda) {
  return [inner = std::move(inner), n_linear, lambda](std::span<const double> theta,
                                                      std::vector<double>* grad) {
    double f = inner(theta, grad);
    if (!std::isfinite(f)) return f;
    double r = 0.0;
    for (std::size_t i = 0; i < n_linear; ++i) r += theta[i] * theta[i];
    if (grad)
      for (std::size_t i = 0; i < n_linear; ++i) (*grad)[i] += 2.0 * lambda * theta[i];
    return f + lambda * r;
  };
}

struct SolveOutcome {
  std::vector<double> point;  // fit-space solution
  double cost = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  double grad_norm_inf = 0.0;  // preconditioned-space gradient at the solution
  bool converged = false;
  std::string message;
};

// Full solve: L-BFGS restarts with the curvature preconditioner recomputed
// at every restart, so the metric tracks the local Fisher information as
// the iterate moves.
SolveOutcome run_lbfgs(const FitSpaceFn& fn,
                       const std::function<std::vector<double>(std::span<const double>)>& fisher_at,
                       std::vector<double> start_fit, const FitConfig& config) {
  SolveOutcome out;
  std::vector<double> x_fit = std::move(start_fit);
  const std::size_t np = x_fit.size();

  LbfgsOptions opts;
  opts.grad_tolerance = config.gradient_tolerance;

  double prev_cost = std::numeric_limits<double>::infinity();
  std::size_t iterations_left = config.max_iterations;
  LbfgsReport last;
  for (int round = 0; round < 40 && iterations_left > 0; ++round) {
    std::vector<double> scale = scale_from_fisher(fisher_at(x_fit));
    ObjectiveFn scaled = [&fn, &scale, np](std::span<const double> xs,
                                           std::vector<double>* grad) {
      std::vector<double> theta(np);
      for (std::size_t i = 0; i < np; ++i) theta[i] = xs[i] * scale[i];
      std::vector<double> g;
      double f = fn(theta, grad ? &g : nullptr);
      if (grad) {
        grad->resize(np);
        for (std::size_t i = 0; i < np; ++i) (*grad)[i] = g[i] * scale[i];
      }
      return f;
    };
    std::vector<double> xs(np);
    for (std::size_t i = 0; i < np; ++i) xs[i] = x_fit[i] / scale[i];
    opts.max_iterations = iterations_left;
    last = lbfgs_minimize(scaled, xs, opts);
    for (std::size_t i = 0; i < np; ++i) x_fit[i] = xs[i] * scale[i];

    out.iterations += last.iterations;
    iterations_left -= std::min(iterations_left, std::max<std::size_t>(last.iterations, 1));
    out.message = last.message;
    double improved = prev_cost - last.f;
    prev_cost = last.f;
    if (last.converged) break;
    if (!(improved > 1e-11 * (1.0 + std::fabs(last.f)))) break;
  }
  out.point = std::move(x_fit);
  out.cost = last.f;
  out.grad_norm_inf = last.grad_inf;
  out.converged = last.converged;
  return out;
}

// Fit-space objective for the bulk-and-tails model: undo the shape
// reparameterization, evaluate the likelihood, chain gradients back.
FitSpaceFn bats_fit_objective(const BatsLikelihood& lik, double margin) {
  return [&lik, margin](std::span<const double> theta, std::vector<double>* grad) {
    std::vector<double> natural = bats_fit_to_natural(theta, margin);
    std::vector<double> gn;
    double f = lik.eval(natural, grad ? &gn : nullptr);
    if (grad) {
      const std::size_t k0 = natural.size() - 3;
      const double nu = std::exp(natural[k0 + 2]);
      *grad = gn;
      (*grad)[k0 + 2] = gn[k0 + 2] + gn[k0] * natural[k0] + gn[k0 + 1] * natural[k0 + 1];
      (*grad)[k0] = gn[k0] * 0.5 * nu * logistic(theta[k0]);
      (*grad)[k0 + 1] = gn[k0 + 1] * 0.5 * nu * logistic(theta[k0 + 1]);
    }
    return f;
  };
}

// Fisher diagonal carried from natural to fit space (diagonal terms of the
// chain rule only; preconditioning needs magnitudes, not exactness).
std::vector<double> bats_fisher_to_fit(std::vector<double> fisher,
                                       std::span<const double> natural,
                                       std::span<const double> theta, double margin) {
  const std::size_t k0 = natural.size() - 3;
  const double nu = std::exp(natural[k0 + 2]);
  double d0 = 0.5 * nu * logistic(theta[k0]);
  double d1 = 0.5 * nu * logistic(theta[k0 + 1]);
  std::vector<double> out = std::move(fisher);
  out[k0 + 2] = out[k0 + 2] + out[k0] * natural[k0] * natural[k0] +
                out[k0 + 1] * natural[k0 + 1] * natural[k0 + 1];
  out[k0] *= d0 * d0;
  out[k0 + 1] *= d1 * d1;
  return out;
}

// Least-squares seasonal location fit: minimum-norm solution of
// [1 S(d)] c = y (the partition-of-unity basis makes the intercept column
// linearly dependent on the splines, so plain normal equations would be
// singular). Returns the coefficients and the residual standard deviation.
struct OlsSeasonal {
  Eigen::VectorXd coeffs;  // intercept + splines
  double resid_sd = 0.0;
};

OlsSeasonal ols_seasonal_location(const ObsDesign& design) {
  const int n = design.n_basis;
  const Eigen::Index m = static_cast<Eigen::Index>(design.size());
  Eigen::MatrixXd X(m, n + 1);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    for (int j = 0; j < n; ++j) X(i, 1 + j) = design.spline[i * n + j];
    y[i] = design.x[i];
  }
  // The partition-of-unity basis makes the intercept column an exact
  // combination of the splines; an explicit rank threshold forces the
  // decomposition to drop that direction and return the minimum-norm fit.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(X);
  OlsSeasonal out;
  out.coeffs = cod.solve(y);
  Eigen::VectorXd r = y - X * out.coeffs;
  out.resid_sd = m > 1 ? std::sqrt(r.squaredNorm() / static_cast<double>(m - 1)) : 1.0;
  if (!(out.resid_sd > 0.0)) out.resid_sd = 1.0;
  return out;
}

void require_two_years(const ObservationSeries& data) {
  if (data.dates.empty() || data.dates.back() - data.dates.front() < 730)
    throw insufficient_data_error("fit: need at least 2 full years of data");
}

}  // namespace

// ---------------------------------------------------------------------------
// Bulk-and-tails fit

SeasonalBatsModel bats_default_init(const ObservationSeries& data, double scale_intercept) {
  SeasonalBatsModel init;
  init.basis = build_periodic_spline_basis(8, kDaysPerYear);
  init.covariate = data.covariate;
  init.station_id = data.station_id;
  init.first_obs = data.first_obs;
  init.loc_lower.spline.assign(8, 0.0);
  init.loc_upper.spline.assign(8, 0.0);
  init.scale_lower.spline.assign(8, 0.0);
  init.scale_upper.spline.assign(8, 0.0);

  OlsSeasonal ols = ols_seasonal_location(ObsDesign::build(data, init.basis));
  init.loc_lower.intercept = ols.coeffs[0] - ols.resid_sd;
  init.loc_upper.intercept = ols.coeffs[0] + ols.resid_sd;
  for (int j = 0; j < 8; ++j) {
    init.loc_lower.spline[j] = ols.coeffs[1 + j];
    init.loc_upper.spline[j] = ols.coeffs[1 + j];
  }
  init.kappa0 = 0.0;
  init.kappa1 = 0.0;
  init.log_nu = std::log(10.0);
  init.scale_lower.intercept = scale_intercept;
  init.scale_upper.intercept = scale_intercept;
  return init;
}

BatsFitResult fit_bats(const ObservationSeries& data, const FitConfig& config,
                       std::span<const double> weights,
                       const SeasonalBatsModel* warm_start) {
  config.validate();
  require_two_years(data);

  SeasonalBatsModel model;
  if (warm_start) {
    model = *warm_start;
  } else {
    model = bats_default_init(data, config.scale_intercept_grid.front());
  }

  BatsLikelihood lik(ObsDesign::build(data, model.basis, weights),
                     BatsLikelihood::OnViolation::penalty);
  const double margin = config.constraint_margin;

  std::vector<std::vector<double>> starts;
  if (warm_start) {
    starts.push_back(pack_bats(*warm_start));
  } else {
    SeasonalBatsModel init = model;
    for (double g0 : config.scale_intercept_grid) {
      init.scale_lower.intercept = g0;
      init.scale_upper.intercept = g0;
      starts.push_back(pack_bats(init));
    }
  }

  SolveOutcome best;
  std::vector<double> best_init;
  FitSpaceFn objective =
      with_ridge(bats_fit_objective(lik, margin), lik.n_params() - 3, config.coefficient_ridge);
  auto fisher_at = [&lik, margin](std::span<const double> theta) {
    std::vector<double> natural = bats_fit_to_natural(theta, margin);
    return bats_fisher_to_fit(lik.fisher_diag(natural), natural, theta, margin);
  };
  for (const auto& natural_init : starts) {
    std::vector<double> theta = bats_natural_to_fit(natural_init, margin);
    SolveOutcome got = run_lbfgs(objective, fisher_at, std::move(theta), config);
    if (got.cost < best.cost) {
      best = std::move(got);
      best_init = natural_init;
    }
  }
  if (best.point.empty())
    throw numerical_error("fit_bats: every profiled start failed to evaluate");

  std::vector<double> natural = bats_fit_to_natural(best.point, margin);
  unpack_bats(natural, model);

  BatsFitResult result;
  result.model = model;
  result.diag.neg_loglik = lik.eval(natural, nullptr);  // without the ridge
  result.diag.iterations = best.iterations;
  result.diag.gradient_norm = best.grad_norm_inf;
  result.diag.init_used = best_init;
  result.diag.message = best.message;
  std::size_t violations = 0;
  lik.eval(natural, nullptr, &violations);
  result.diag.support_violations = violations;
  result.diag.converged = best.converged && violations == 0;
  return result;
}

// ---------------------------------------------------------------------------
// Skew-normal fit

SkewFitResult fit_skew_normal(const ObservationSeries& data, const FitConfig& config,
                              std::span<const double> weights,
                              const SeasonalSkewNormalModel* warm_start) {
  config.validate();
  require_two_years(data);

  SeasonalSkewNormalModel model;
  if (warm_start) {
    model = *warm_start;
  } else {
    model.basis = build_periodic_spline_basis(8, kDaysPerYear);
    model.covariate = data.covariate;
    model.station_id = data.station_id;
    model.first_obs = data.first_obs;
    model.loc.spline.assign(8, 0.0);
    model.log_scale.spline.assign(8, 0.0);
    model.skew.spline.assign(8, 0.0);
  }

  SkewNormalLikelihood lik(ObsDesign::build(data, model.basis, weights));

  std::vector<double> init;
  if (warm_start) {
    init = pack_skew(*warm_start);
  } else {
    OlsSeasonal ols = ols_seasonal_location(lik.design());
    SeasonalSkewNormalModel m0 = model;
    m0.loc.intercept = ols.coeffs[0];
    for (int j = 0; j < m0.basis.n_basis(); ++j) m0.loc.spline[j] = ols.coeffs[1 + j];
    m0.log_scale.intercept = std::log(ols.resid_sd);
    init = pack_skew(m0);
  }

  FitSpaceFn objective = with_ridge(
      [&lik](std::span<const double> v, std::vector<double>* g) { return lik.eval(v, g); },
      lik.n_params(), config.coefficient_ridge);
  auto fisher_at = [&lik](std::span<const double> v) { return lik.fisher_diag(v); };
  SolveOutcome got = run_lbfgs(objective, fisher_at, init, config);
  if (got.point.empty())
    throw numerical_error("fit_skew_normal: optimization failed to evaluate");
  unpack_skew(got.point, model);

  SkewFitResult result;
  result.model = model;
  result.diag.neg_loglik = lik.eval(got.point, nullptr);  // without the ridge
  result.diag.iterations = got.iterations;
  result.diag.gradient_norm = got.grad_norm_inf;
  result.diag.init_used = init;
  result.diag.converged = got.converged;
  result.diag.message = got.message;
  return result;
}

// ---------------------------------------------------------------------------
// GPD fit

GpdFitResult fit_gpd(const ObservationSeries& data, Tail tail, double p_mu,
                     const FitConfig& config, std::span<const double> weights,
                     const SeasonalGpdModel* warm_start) {
  config.validate();
  require_two_years(data);
  if (!(p_mu > 0.0 && p_mu < 1.0)) throw config_error("fit_gpd: p_mu must be in (0,1)");

  const double sign = tail == Tail::upper ? 1.0 : -1.0;

  SeasonalGpdModel model;
  if (warm_start) {
    model = *warm_start;
  } else {
    model.basis = build_periodic_spline_basis(8, kDaysPerYear);
    model.covariate = data.covariate;
    model.station_id = data.station_id;
    model.first_obs = data.first_obs;
    model.tail = tail;
    model.p_mu = p_mu;
    model.log_scale.spline.assign(8, 0.0);

    // Threshold curve: quantile regression of the (sign-adjusted) values on
    // the spline columns alone; the partition of unity spans the intercept.
    ObsDesign full = ObsDesign::build(data, model.basis);
    const int n = model.basis.n_basis();
    Eigen::MatrixXd X(full.size(), n);
    Eigen::VectorXd y(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
      for (int j = 0; j < n; ++j) X(i, j) = full.spline[i * n + j];
      y[i] = sign * full.x[i];
    }
    Eigen::VectorXd beta = quantile_regression(X, y, p_mu);
    model.threshold.intercept = 0.0;
    model.threshold.spline.assign(beta.data(), beta.data() + n);
  }

  // Exceedance sub-design with x replaced by the excess over mu(d).
  ObsDesign full = ObsDesign::build(data, model.basis, weights);
  const int n = model.basis.n_basis();
  ObsDesign ex;
  ex.n_basis = n;
  for (std::size_t i = 0; i < full.size(); ++i) {
    double yv = sign * full.x[i];
    double mu = model.threshold.intercept;
    for (int j = 0; j < n; ++j) mu += model.threshold.spline[j] * full.spline[i * n + j];
    if (yv <= mu) continue;
    ex.x.push_back(yv - mu);
    ex.weight.push_back(full.weight[i]);
    ex.C.push_back(full.C[i]);
    ex.cosd.push_back(full.cosd[i]);
    ex.sind.push_back(full.sind[i]);
    ex.day.push_back(full.day[i]);
    for (int j = 0; j < n; ++j) ex.spline.push_back(full.spline[i * n + j]);
  }
  if (ex.size() < 50)
    throw insufficient_data_error("fit_gpd: fewer than 50 exceedances (" +
                                  std::to_string(ex.size()) + ")");

  GpdLikelihood lik(std::move(ex), BatsLikelihood::OnViolation::penalty);

  std::vector<double> init;
  if (warm_start) {
    init = pack_gpd(*warm_start);
  } else {
    double mean_excess = 0.0;
    for (double e : lik.design().x) mean_excess += e;
    mean_excess /= lik.design().size();
    SeasonalGpdModel m0 = model;
    m0.log_scale.intercept = std::log(std::max(1e-8, mean_excess));
    m0.xi = 0.0;
    init = pack_gpd(m0);
  }

  FitSpaceFn objective = with_ridge(
      [&lik](std::span<const double> v, std::vector<double>* g) { return lik.eval(v, g, nullptr); },
      lik.n_params() - 1, config.coefficient_ridge);
  auto fisher_at = [&lik](std::span<const double> v) { return lik.fisher_diag(v); };
  SolveOutcome got = run_lbfgs(objective, fisher_at, init, config);
  if (got.point.empty()) throw numerical_error("fit_gpd: optimization failed to evaluate");
  unpack_gpd(got.point, model);

  GpdFitResult result;
  result.model = model;
  result.n_exceedances = lik.design().size();
  result.diag.neg_loglik = lik.eval(got.point, nullptr);  // without the ridge
  result.diag.iterations = got.iterations;
  result.diag.gradient_norm = got.grad_norm_inf;
  result.diag.init_used = init;
  result.diag.message = got.message;
  std::size_t violations = 0;
  lik.eval(got.point, nullptr, &violations);
  result.diag.support_violations = violations;
  result.diag.converged = got.converged && violations == 0;
  return result;
}

}  // namespace bats
