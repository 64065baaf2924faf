#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bats/calendar.hpp"
#include "bats/observations.hpp"

namespace bats {

enum class Season { DJF, MAM, JJA, SON };

Season season_of(const Date& date);
const char* season_name(Season s);

/// Continuous ranked probability score: integral of (F(y) - 1[y >= x])^2
/// over [lo, hi] (extended to include x), by adaptive Simpson with the
/// subdivision seeded at the indicator step. Detects a non-monotone cdf
/// during refinement and throws integrity_error.
double crps(const std::function<double(double)>& cdf, double x, double lo, double hi,
            double tol = 1e-6);

/// Cdf of an observation censored to equal `mu` when it falls below it.
/// full_model wraps a cdf of the whole variable; gpd wraps a tail cdf whose
/// mass below the threshold is the fixed probability p_mu.
struct CensoredCdf {
  enum class Kind { full_model, gpd };
  Kind kind = Kind::full_model;
  double mu = 0.0;
  double p_mu = 0.95;                        // gpd kind only
  std::function<double(double)> underlying;  // F_X
  double hi_bound = 0.0;  // where the censored variable's mass effectively ends

  double operator()(double z) const;
};

/// Tail-weighted CRPS: same integrand restricted to y >= q (upper-tail
/// convention; callers handle the lower tail by negation). Requires
/// x already censored at cz.mu and q >= cz.mu.
double wcrps(const CensoredCdf& cz, double x_censored, double q, double tol = 1e-6);

/// Cross-validation folds: consecutive blocks of 4 or 5 observation years.
struct CvFolds {
  std::vector<int> years;        // sorted
  std::vector<int> fold_of_year; // parallel to years
  int n_folds = 0;

  int fold_of(int year) const;
  std::vector<int> years_of(int fold) const;
};

/// Deterministic blocking: ceil(n/5) folds, sizes 4 or 5, any longer blocks
/// first. Throws insufficient_data_error for fewer than 8 years and
/// config_error for n = 11 (the one count >= 8 with no {4,5} partition).
CvFolds make_cv_folds(const std::vector<int>& years);

/// One observation's instantaneous score with its fold and date.
struct ScoredObs {
  Date date;
  int fold = 0;
  double score = 0.0;
};

struct ComparisonRow {
  std::string label;  // "Year", "DJF", ...
  double value = 0.0;
  int folds_used = 0;
  std::vector<int> excluded_folds;  // fold-season cells with no observations
};

/// Table rows 100 * sum_k mean_k(a - b) / sum_k mean_k(a) for the whole
/// year and per season. Negative values mean model `a` scores better. The
/// two score lists must be aligned index-by-index on identical observations.
std::vector<ComparisonRow> crps_comparison(const std::vector<ScoredObs>& a,
                                           const std::vector<ScoredObs>& b);

/// Single value 100 * sum_k mean_k(a - b) / sum_k mean_k(b) (denominator is
/// the reference model b, conventionally the GPD).
ComparisonRow wcrps_comparison(const std::vector<ScoredObs>& a,
                               const std::vector<ScoredObs>& b);

/// Cross-validation runner. For each fold, `make_scorers` receives the
/// training subseries (fold years excluded), the training years, and the
/// fold index, and returns one instantaneous scoring callback per model;
/// the returned callbacks are applied to every held-out observation.
/// Scoring a fold never sees its own years in training, by construction.
using ScoreFn = std::function<double(const Date& date, double x)>;
using MakeScorers = std::function<std::vector<ScoreFn>(const ObservationSeries& train,
                                                       const std::vector<int>& train_years,
                                                       int fold)>;

struct CvScores {
  std::vector<ScoredObs> obs;                // scores left 0; template rows
  std::vector<std::vector<ScoredObs>> per_model;
};

CvScores run_cross_validation(const ObservationSeries& data, const CvFolds& folds,
                              const MakeScorers& make_scorers);

}  // namespace bats
