#pragma once

#include <string>
#include <vector>

#include "bats/observations.hpp"
#include "bats/rng.hpp"
#include "bats/seasonal_model.hpp"

namespace testutil {

/// Covariate rising linearly over [y0, y1].
inline bats::YearlyCovariate linear_covariate(int y0, int y1, double base = 5.8,
                                              double per_year = 0.012) {
  std::vector<int> years;
  std::vector<double> values;
  for (int y = y0; y <= y1; ++y) {
    years.push_back(y);
    values.push_back(base + per_year * (y - y0));
  }
  return bats::YearlyCovariate(years, values);
}

/// Daily draws from a seasonal bulk-and-tails model over whole calendar
/// years, by inverse-cdf sampling.
inline bats::ObservationSeries simulate_daily(const bats::SeasonalBatsModel& model,
                                              int year0, int year1, bats::Rng& rng,
                                              const std::string& station = "SYNTH") {
  std::vector<bats::Date> dates;
  std::vector<double> values;
  bats::Date first{year0, 1, 1};
  bats::Date stop{year1 + 1, 1, 1};
  for (long s = first.serial(); s < stop.serial(); ++s) {
    bats::Date date = bats::Date::from_serial(s);
    bats::DayIndex idx = bats::day_index(date, first);
    bats::BatsParams p = bats::params_at(model, idx);
    dates.push_back(date);
    values.push_back(bats::bats_quantile(p, rng.uniform_open01()));
  }
  return bats::make_series(station, std::move(dates), std::move(values), model.covariate);
}

/// A moderately seasonal ground-truth model with a real warming trend.
inline bats::SeasonalBatsModel ground_truth_model(const bats::YearlyCovariate& covariate,
                                                  const bats::Date& first_obs) {
  bats::SeasonalBatsModel m;
  m.basis = bats::build_periodic_spline_basis(8, bats::kDaysPerYear);
  m.covariate = covariate;
  m.station_id = "TRUTH";
  m.first_obs = first_obs;
  m.loc_lower.intercept = -14.0;
  m.loc_upper.intercept = -4.0;
  m.loc_lower.spline = {2.0, 6.0, 11.0, 14.0, 12.0, 7.0, 2.5, 0.5};
  m.loc_upper.spline = {2.5, 6.5, 11.5, 14.5, 12.5, 7.5, 3.0, 1.0};
  m.loc_lower.trend = 2.0;
  m.loc_lower.trend_cos = 0.4;
  m.loc_lower.trend_sin = -0.2;
  m.loc_upper.trend = 2.0;
  m.loc_upper.trend_cos = 0.3;
  m.loc_upper.trend_sin = -0.1;
  m.scale_lower.intercept = 1.05;
  m.scale_lower.spline = {0.0, -0.1, -0.25, -0.3, -0.25, -0.1, 0.0, 0.05};
  m.scale_upper.intercept = 0.9;
  m.scale_upper.spline = {0.05, -0.05, -0.2, -0.3, -0.2, -0.05, 0.05, 0.1};
  m.kappa0 = -0.25;
  m.kappa1 = -0.18;
  m.log_nu = std::log(8.0);
  return m;
}

}  // namespace testutil
