#pragma once

#include <string>
#include <vector>

#include "bats/bats_distribution.hpp"
#include "bats/calendar.hpp"
#include "bats/covariates.hpp"
#include "bats/gpd.hpp"
#include "bats/skew_normal.hpp"

namespace bats {

/// Coefficients of one location curve: intercept, seasonal splines, and the
/// covariate-scaled trend block (level plus annual-harmonic interaction).
struct LocationCoeffs {
  double intercept = 0.0;
  std::vector<double> spline;  // one per basis function
  double trend = 0.0;
  double trend_cos = 0.0;
  double trend_sin = 0.0;

  friend bool operator==(const LocationCoeffs&, const LocationCoeffs&) = default;
};

/// Coefficients of one log-scale (or skewness) curve: intercept plus splines.
struct LogScaleCoeffs {
  double intercept = 0.0;
  std::vector<double> spline;

  friend bool operator==(const LogScaleCoeffs&, const LogScaleCoeffs&) = default;
};

/// Number of days in the conventional query grid (integer days 0..364 of
/// the fractional 365.25-day cycle).
inline constexpr int kDayGrid = 365;

/// Seasonal bulk-and-tails model: two location curves with trend, two
/// log-scale curves, constant shapes and log degrees of freedom. With the
/// default 8-function basis this is 45 free parameters.
struct SeasonalBatsModel {
  LocationCoeffs loc_lower, loc_upper;
  LogScaleCoeffs scale_lower, scale_upper;
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double log_nu = 2.302585092994045684;  // log 10

  PeriodicSplineBasis basis;
  YearlyCovariate covariate;

  std::string station_id;
  Date first_obs;

  std::size_t param_count() const;
};

struct SeasonalSkewNormalModel {
  LocationCoeffs loc;
  LogScaleCoeffs log_scale;
  LogScaleCoeffs skew;  // seasonal skewness, no climate covariate

  PeriodicSplineBasis basis;
  YearlyCovariate covariate;

  std::string station_id;
  Date first_obs;

  std::size_t param_count() const;
};

enum class Tail { upper, lower };

/// Seasonal GPD over threshold exceedances. For Tail::lower all
/// coefficients live in negated-data space and evaluation negates inputs.
struct SeasonalGpdModel {
  LogScaleCoeffs threshold;   // quantile-regression threshold curve, frozen
  LocationCoeffs log_scale;   // seasonal + trend log-scale
  double xi = 0.0;            // constant shape
  Tail tail = Tail::upper;
  double p_mu = 0.95;         // quantile level that defined the threshold

  PeriodicSplineBasis basis;
  YearlyCovariate covariate;

  std::string station_id;
  Date first_obs;

  std::size_t param_count() const;  // fitted parameters (threshold excluded)
};

/// Location formula: intercept + spline dot + C(y) (trend + harmonics).
double location_at(const LocationCoeffs& c, const PeriodicSplineBasis& basis,
                   double C, double d);
/// Intercept + spline dot (no covariate block).
double curve_at(const LogScaleCoeffs& c, const PeriodicSplineBasis& basis, double d);

/// Instantaneous parameters at a day/year. Throws std::out_of_range naming
/// the year when the covariate does not cover it.
BatsParams params_at(const SeasonalBatsModel& m, const DayIndex& idx);
SkewNormalParams skew_params_at(const SeasonalSkewNormalModel& m, const DayIndex& idx);
GpdParams gpd_params_at(const SeasonalGpdModel& m, const DayIndex& idx);

/// Per-day quantile curve over the 365-day grid for one year.
std::vector<double> quantile_curve(const SeasonalBatsModel& m, double q, int year);

enum class ChangeBaseline {
  median_at_start,  // curve(q, year1) - curve(0.5, year0)
  same_quantile,    // curve(q, year1) - curve(q, year0)
};

std::vector<double> quantile_change(const SeasonalBatsModel& m, double q, int year0,
                                    int year1,
                                    ChangeBaseline baseline = ChangeBaseline::median_at_start);

/// The five conventional quantile spreads (0.99-0.95, 0.95-0.75, 0.75-0.25,
/// 0.25-0.05, 0.05-0.01): per-day curves plus their annual means.
struct QuantileSpreads {
  std::vector<std::vector<double>> daily;  // 5 x 365
  std::vector<double> annual_mean;         // 5
};

QuantileSpreads quantile_spreads(const SeasonalBatsModel& m, int year);

/// Labels matching the spread definitions above, for output headers.
const std::vector<std::string>& spread_labels();

}  // namespace bats
