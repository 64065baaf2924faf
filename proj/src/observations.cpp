#include "bats/observations.hpp"

#include <cmath>
#include <stdexcept>

namespace bats {

std::vector<int> ObservationSeries::observation_years() const {
  std::vector<int> years;
  for (const Date& d : dates)
    if (years.empty() || years.back() != d.year) years.push_back(d.year);
  return years;
}

ObservationSeries make_series(std::string station_id, std::vector<Date> dates,
                              std::vector<double> values, YearlyCovariate covariate) {
  if (dates.size() != values.size())
    throw std::invalid_argument("ObservationSeries: dates/values size mismatch");
  if (dates.empty()) throw std::invalid_argument("ObservationSeries: empty series");
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!dates[i].is_valid())
      throw std::invalid_argument("ObservationSeries: invalid date " + dates[i].to_string());
    if (i > 0 && !(dates[i - 1] < dates[i]))
      throw std::invalid_argument("ObservationSeries: dates must be strictly increasing");
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("ObservationSeries: values must be finite");
  }
  ObservationSeries s;
  s.station_id = std::move(station_id);
  s.first_obs = dates.front();
  s.dates = std::move(dates);
  s.values = std::move(values);
  s.covariate = std::move(covariate);
  return s;
}

void check_covariate_coverage(const ObservationSeries& data) {
  for (int y : data.observation_years())
    if (!data.covariate.has(y))
      throw std::out_of_range("covariate has no value for year " + std::to_string(y));
}

}  // namespace bats
