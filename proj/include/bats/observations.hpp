#pragma once

#include <span>
#include <string>
#include <vector>

#include "bats/calendar.hpp"
#include "bats/covariates.hpp"

namespace bats {

/// Dated daily observations with the attached yearly covariate. Dates are
/// strictly increasing; gaps are simply absent days (no imputation).
struct ObservationSeries {
  std::string station_id;
  std::vector<Date> dates;
  std::vector<double> values;
  Date first_obs;
  YearlyCovariate covariate;

  std::size_t size() const { return dates.size(); }

  /// Sorted distinct calendar years with at least one observation.
  std::vector<int> observation_years() const;

  /// Subseries keeping only observations whose year passes the predicate;
  /// first_obs is preserved so day-of-year phase does not shift.
  template <class Pred>
  ObservationSeries filter_years(Pred&& keep) const {
    ObservationSeries out;
    out.station_id = station_id;
    out.first_obs = first_obs;
    out.covariate = covariate;
    for (std::size_t i = 0; i < dates.size(); ++i) {
      if (keep(dates[i].year)) {
        out.dates.push_back(dates[i]);
        out.values.push_back(values[i]);
      }
    }
    return out;
  }
};

/// Validates ordering/finiteness and sets first_obs from the data.
ObservationSeries make_series(std::string station_id, std::vector<Date> dates,
                              std::vector<double> values, YearlyCovariate covariate);

/// Throws std::out_of_range naming the first observation year the covariate
/// does not cover.
void check_covariate_coverage(const ObservationSeries& data);

}  // namespace bats
