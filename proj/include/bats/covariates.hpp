#pragma once

#include <utility>
#include <vector>

#include "bats/calendar.hpp"

namespace bats {

/// Periodic cubic B-spline basis with n_basis equally spaced knots on
/// [0, period). Each basis function is nonnegative, C2, locally supported,
/// and the family sums to one everywhere (partition of unity).
class PeriodicSplineBasis {
 public:
  PeriodicSplineBasis() = default;
  PeriodicSplineBasis(int n_basis, double period);

  int n_basis() const { return n_; }
  double period() const { return period_; }
  const std::vector<double>& knots() const { return knots_; }

  std::vector<double> evaluate(double d) const;
  /// Writes n_basis values; out must have room.
  void evaluate_into(double d, double* out) const;

  friend bool operator==(const PeriodicSplineBasis&, const PeriodicSplineBasis&) = default;

 private:
  int n_ = 0;
  double period_ = 0.0;
  std::vector<double> knots_;
};

/// Builds the basis; throws config_error when n_basis < 4 (support of a
/// cubic B-spline spans four knot intervals).
PeriodicSplineBasis build_periodic_spline_basis(int n_basis, double period);

/// Yearly covariate series (e.g. log CO2-equivalent), strictly increasing
/// years.
class YearlyCovariate {
 public:
  YearlyCovariate() = default;
  YearlyCovariate(std::vector<int> years, std::vector<double> values);

  const std::vector<int>& years() const { return years_; }
  const std::vector<double>& values() const { return values_; }
  bool has(int year) const;
  /// Throws std::out_of_range naming the year when absent.
  double at(int year) const;
  std::size_t size() const { return years_.size(); }

  friend bool operator==(const YearlyCovariate&, const YearlyCovariate&) = default;

 private:
  std::vector<int> years_;
  std::vector<double> values_;
};

/// Day-of-year position and calendar year of one observation instant.
struct DayIndex {
  double d = 0.0;  // in [0, 365.25)
  int y = 1970;
};

inline constexpr double kDaysPerYear = 365.25;

/// Days elapsed since the first observation, modulo 365.25. Throws
/// std::domain_error when date precedes first_obs.
double day_of_year(const Date& date, const Date& first_obs);

DayIndex day_index(const Date& date, const Date& first_obs);

/// (cos, sin) of the annual harmonic 2 pi d / 365.25.
std::pair<double, double> harmonic_pair(double d);

/// Fills target years absent from `primary` with ordinary least squares
/// predictions from `auxiliary`; existing primary values are kept as-is.
/// Throws insufficient_data_error with fewer than 3 overlapping years and
/// std::out_of_range when auxiliary lacks a needed year.
YearlyCovariate extend_covariate(const YearlyCovariate& primary,
                                 const YearlyCovariate& auxiliary,
                                 const std::vector<int>& target_years);

}  // namespace bats
