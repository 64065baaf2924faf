#pragma once

#include <optional>
#include <string>

#include "bats/covariates.hpp"
#include "bats/observations.hpp"

namespace bats {

/// One parsed input row before filtering.
struct RawDailyRecord {
  std::string station_id;
  Date date;
  double mean_temp = 0.0;  // degrees C after any unit conversion
  std::optional<int> hours_reported;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t dropped_sanity = 0;    // outside [-90, 60] C
  std::size_t dropped_hours = 0;     // hours listed but below the cutoff
  std::size_t dropped_duplicate = 0; // same date appearing again (first kept)
};

/// Physical sanity bounds for daily mean surface temperature, degrees C.
inline constexpr double kMinSaneTempC = -90.0;
inline constexpr double kMaxSaneTempC = 60.0;

/// Reads the canonical daily CSV `station,date,temp[,hours]` (header
/// required, UTF-8, dates YYYY-MM-DD). Rows failing the sanity bounds or
/// reporting fewer than min_hours hours are dropped and counted; duplicate
/// dates keep the first occurrence. The result is sorted by date. The
/// covariate is attached separately. Throws parse_error (with the line
/// number) on malformed input and insufficient_data_error when no valid
/// observations remain.
ObservationSeries ingest(const std::string& csv_path, const YearlyCovariate& covariate,
                         int min_hours = 20, bool fahrenheit = false,
                         IngestReport* report = nullptr);

/// Reads a yearly covariate CSV with header `year,value`.
YearlyCovariate read_covariate_csv(const std::string& csv_path);

}  // namespace bats
