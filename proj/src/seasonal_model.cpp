#include "bats/seasonal_model.hpp"

#include <cmath>
#include <stdexcept>

namespace bats {

namespace {

void check_sizes(std::size_t have, int want, const char* what) {
  if (have != static_cast<std::size_t>(want))
    throw std::invalid_argument(std::string(what) +
                                ": spline coefficient count does not match basis");
}

}  // namespace

double location_at(const LocationCoeffs& c, const PeriodicSplineBasis& basis,
                   double C, double d) {
  check_sizes(c.spline.size(), basis.n_basis(), "location coefficients");
  double buf[64];
  basis.evaluate_into(d, buf);
  double v = c.intercept;
  for (int j = 0; j < basis.n_basis(); ++j) v += c.spline[j] * buf[j];
  auto [cosd, sind] = harmonic_pair(d);
  v += C * (c.trend + c.trend_cos * cosd + c.trend_sin * sind);
  return v;
}

double curve_at(const LogScaleCoeffs& c, const PeriodicSplineBasis& basis, double d) {
  check_sizes(c.spline.size(), basis.n_basis(), "curve coefficients");
  double buf[64];
  basis.evaluate_into(d, buf);
  double v = c.intercept;
  for (int j = 0; j < basis.n_basis(); ++j) v += c.spline[j] * buf[j];
  return v;
}

std::size_t SeasonalBatsModel::param_count() const {
  std::size_t n = static_cast<std::size_t>(basis.n_basis());
  return 2 * (n + 4) + 2 * (n + 1) + 3;
}

std::size_t SeasonalSkewNormalModel::param_count() const {
  std::size_t n = static_cast<std::size_t>(basis.n_basis());
  return (n + 4) + 2 * (n + 1);
}

std::size_t SeasonalGpdModel::param_count() const {
  std::size_t n = static_cast<std::size_t>(basis.n_basis());
  return (n + 4) + 1;
}

BatsParams params_at(const SeasonalBatsModel& m, const DayIndex& idx) {
  double C = m.covariate.at(idx.y);
  BatsParams p;
  p.nu = std::exp(m.log_nu);
  p.phi0 = location_at(m.loc_lower, m.basis, C, idx.d);
  p.phi1 = location_at(m.loc_upper, m.basis, C, idx.d);
  p.tau0 = std::exp(curve_at(m.scale_lower, m.basis, idx.d));
  p.tau1 = std::exp(curve_at(m.scale_upper, m.basis, idx.d));
  p.kappa0 = m.kappa0;
  p.kappa1 = m.kappa1;
  return p;
}

SkewNormalParams skew_params_at(const SeasonalSkewNormalModel& m, const DayIndex& idx) {
  double C = m.covariate.at(idx.y);
  SkewNormalParams p;
  p.mu = location_at(m.loc, m.basis, C, idx.d);
  p.sigma = std::exp(curve_at(m.log_scale, m.basis, idx.d));
  p.alpha = curve_at(m.skew, m.basis, idx.d);
  return p;
}

GpdParams gpd_params_at(const SeasonalGpdModel& m, const DayIndex& idx) {
  double C = m.covariate.at(idx.y);
  GpdParams p;
  p.mu = curve_at(m.threshold, m.basis, idx.d);
  p.sigma = std::exp(location_at(m.log_scale, m.basis, C, idx.d));
  p.xi = m.xi;
  return p;
}

std::vector<double> quantile_curve(const SeasonalBatsModel& m, double q, int year) {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("quantile_curve: q must be in (0,1)");
  std::vector<double> out(kDayGrid);
  for (int d = 0; d < kDayGrid; ++d)
    out[d] = bats_quantile(params_at(m, {static_cast<double>(d), year}), q);
  return out;
}

std::vector<double> quantile_change(const SeasonalBatsModel& m, double q, int year0,
                                    int year1, ChangeBaseline baseline) {
  std::vector<double> now = quantile_curve(m, q, year1);
  std::vector<double> ref =
      baseline == ChangeBaseline::median_at_start
          ? quantile_curve(m, 0.5, year0)
          : quantile_curve(m, q, year0);
  for (int d = 0; d < kDayGrid; ++d) now[d] -= ref[d];
  return now;
}

const std::vector<std::string>& spread_labels() {
  static const std::vector<std::string> labels = {
      "q0.99-q0.95", "q0.95-q0.75", "q0.75-q0.25", "q0.25-q0.05", "q0.05-q0.01"};
  return labels;
}

QuantileSpreads quantile_spreads(const SeasonalBatsModel& m, int year) {
  const double levels[] = {0.99, 0.95, 0.75, 0.25, 0.05, 0.01};
  std::vector<std::vector<double>> curves(6);
  for (int k = 0; k < 6; ++k) curves[k] = quantile_curve(m, levels[k], year);

  QuantileSpreads out;
  out.daily.assign(5, std::vector<double>(kDayGrid));
  out.annual_mean.assign(5, 0.0);
  for (int k = 0; k < 5; ++k) {
    double sum = 0.0;
    for (int d = 0; d < kDayGrid; ++d) {
      out.daily[k][d] = curves[k][d] - curves[k + 1][d];
      sum += out.daily[k][d];
    }
    out.annual_mean[k] = sum / kDayGrid;
  }
  return out;
}

}  // namespace bats
