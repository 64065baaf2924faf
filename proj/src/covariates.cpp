#include "bats/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "bats/errors.hpp"

namespace bats {

namespace {

// Cardinal cubic B-spline on [0, 4).
double bspline3(double t) {
  if (t < 0.0 || t >= 4.0) return 0.0;
  if (t < 1.0) return t * t * t / 6.0;
  if (t < 2.0) return (-3.0 * t * t * t + 12.0 * t * t - 12.0 * t + 4.0) / 6.0;
  if (t < 3.0) return (3.0 * t * t * t - 24.0 * t * t + 60.0 * t - 44.0) / 6.0;
  double r = 4.0 - t;
  return r * r * r / 6.0;
}

}  // namespace

PeriodicSplineBasis::PeriodicSplineBasis(int n_basis, double period)
    : n_(n_basis), period_(period) {
  if (n_basis < 4) throw config_error("periodic spline basis needs n_basis >= 4");
  if (n_basis > 64) throw config_error("periodic spline basis supports at most 64 functions");
  if (!(period > 0.0)) throw config_error("periodic spline basis needs period > 0");
  knots_.resize(n_);
  for (int j = 0; j < n_; ++j) knots_[j] = period_ * j / n_;
}

void PeriodicSplineBasis::evaluate_into(double d, double* out) const {
  double pos = d / (period_ / n_);
  pos -= n_ * std::floor(pos / n_);  // wrap into [0, n)
  int cell = static_cast<int>(pos);
  if (cell >= n_) cell = n_ - 1;
  double frac = pos - cell;
  std::fill(out, out + n_, 0.0);
  // Only the four splines whose support covers this cell are nonzero.
  for (int k = 0; k < 4; ++k) {
    int j = cell - k;
    while (j < 0) j += n_;
    out[j] += bspline3(frac + k);
  }
}

std::vector<double> PeriodicSplineBasis::evaluate(double d) const {
  std::vector<double> out(n_);
  evaluate_into(d, out.data());
  return out;
}

PeriodicSplineBasis build_periodic_spline_basis(int n_basis, double period) {
  return PeriodicSplineBasis(n_basis, period);
}

YearlyCovariate::YearlyCovariate(std::vector<int> years, std::vector<double> values)
    : years_(std::move(years)), values_(std::move(values)) {
  if (years_.size() != values_.size())
    throw std::invalid_argument("YearlyCovariate: years/values size mismatch");
  for (std::size_t i = 1; i < years_.size(); ++i)
    if (years_[i] <= years_[i - 1])
      throw std::invalid_argument("YearlyCovariate: years must be strictly increasing");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("YearlyCovariate: values must be finite");
}

bool YearlyCovariate::has(int year) const {
  return std::binary_search(years_.begin(), years_.end(), year);
}

double YearlyCovariate::at(int year) const {
  auto it = std::lower_bound(years_.begin(), years_.end(), year);
  if (it == years_.end() || *it != year)
    throw std::out_of_range("covariate has no value for year " + std::to_string(year));
  return values_[static_cast<std::size_t>(it - years_.begin())];
}

double day_of_year(const Date& date, const Date& first_obs) {
  long elapsed = date - first_obs;
  if (elapsed < 0)
    throw std::domain_error("day_of_year: date precedes the first observation");
  return std::fmod(static_cast<double>(elapsed), kDaysPerYear);
}

DayIndex day_index(const Date& date, const Date& first_obs) {
  return {day_of_year(date, first_obs), date.year};
}

std::pair<double, double> harmonic_pair(double d) {
  double ang = 2.0 * 3.14159265358979323846 * d / kDaysPerYear;
  return {std::cos(ang), std::sin(ang)};
}

YearlyCovariate extend_covariate(const YearlyCovariate& primary,
                                 const YearlyCovariate& auxiliary,
                                 const std::vector<int>& target_years) {
  // OLS of primary on auxiliary over the overlapping years.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < primary.size(); ++i) {
    int year = primary.years()[i];
    if (!auxiliary.has(year)) continue;
    double x = auxiliary.at(year), y = primary.values()[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3)
    throw insufficient_data_error(
        "extend_covariate: need at least 3 overlapping years, have " +
        std::to_string(n));
  double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw numerical_error("extend_covariate: auxiliary covariate is constant over overlap");
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;

  std::map<int, double> merged;
  for (std::size_t i = 0; i < primary.size(); ++i)
    merged[primary.years()[i]] = primary.values()[i];
  for (int year : target_years) {
    if (merged.count(year)) continue;  // never overwrite observed values
    merged[year] = intercept + slope * auxiliary.at(year);
  }
  std::vector<int> years;
  std::vector<double> values;
  years.reserve(merged.size());
  values.reserve(merged.size());
  for (const auto& [year, value] : merged) {
    years.push_back(year);
    values.push_back(value);
  }
  return YearlyCovariate(std::move(years), std::move(values));
}

}  // namespace bats
