#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "bats/errors.hpp"
#include "bats/math.hpp"
#include "bats/scoring.hpp"
#include "bats/rng.hpp"
#include "test_helpers.hpp"
#include "test_util.hpp"

using namespace bats;

TEST_CASE("season mapping") {
  CHECK(season_of({2000, 1, 15}) == Season::DJF);
  CHECK(season_of({2000, 12, 1}) == Season::DJF);
  CHECK(season_of({2000, 3, 31}) == Season::MAM);
  CHECK(season_of({2000, 7, 4}) == Season::JJA);
  CHECK(season_of({2000, 11, 30}) == Season::SON);
}

TEST_CASE("crps matches the closed-form gaussian value") {
  Rng rng(1);
  for (int rep = 0; rep < 15; ++rep) {
    double mu = -5.0 + 10.0 * rng.uniform01();
    double sigma = 0.5 + 3.0 * rng.uniform01();
    double x = mu + sigma * (4.0 * rng.uniform01() - 2.0);
    auto cdf = [mu, sigma](double y) { return normal_cdf((y - mu) / sigma); };
    double got = crps(cdf, x, mu - 9.0 * sigma, mu + 9.0 * sigma);
    CHECK(got == doctest::Approx(testutil::gaussian_crps(mu, sigma, x)).epsilon(2e-6));
  }
  // Standard normal observed at its center.
  auto std_cdf = [](double y) { return normal_cdf(y); };
  CHECK(crps(std_cdf, 0.0, -9.0, 9.0) ==
        doctest::Approx((std::sqrt(2.0) - 1.0) / std::sqrt(3.14159265358979323846))
            .epsilon(1e-6));
}

TEST_CASE("crps of a point mass at the observation is zero") {
  double x = 1.7;
  auto point = [x](double y) { return y >= x ? 1.0 : 0.0; };
  CHECK(crps(point, x, -5.0, 5.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("crps is translation invariant") {
  auto cdf = [](double y) { return normal_cdf(y / 2.0); };
  double base = crps(cdf, 0.8, -20.0, 20.0);
  for (double shift : {-3.0, 4.5}) {
    auto shifted = [shift](double y) { return normal_cdf((y - shift) / 2.0); };
    CHECK(crps(shifted, 0.8 + shift, -20.0 + shift, 20.0 + shift) ==
          doctest::Approx(base).epsilon(1e-7));
  }
}

TEST_CASE("crps detects a non-monotone cdf") {
  auto bad = [](double y) { return 0.5 + 0.45 * std::sin(y); };
  CHECK_THROWS_AS(crps(bad, 0.0, -6.0, 6.0), integrity_error);
}

TEST_CASE("censored cdf shapes") {
  auto base = [](double y) { return normal_cdf(y - 3.0); };
  CensoredCdf full{CensoredCdf::Kind::full_model, 2.0, 0.95, base, 12.0};
  CHECK(full(1.0) == 0.0);
  CHECK(full(2.5) == doctest::Approx(normal_cdf(-0.5)));

  auto gpd_tail = [](double y) { return gpd_cdf({2.0, 1.0, 0.1}, y); };
  CensoredCdf cg{CensoredCdf::Kind::gpd, 2.0, 0.95, gpd_tail, 12.0};
  CHECK(cg(1.99) == 0.0);
  CHECK(cg(2.0) == doctest::Approx(0.95));
  CHECK(cg(5.0) == doctest::Approx(0.95 + 0.05 * gpd_cdf({2.0, 1.0, 0.1}, 5.0)));
}

TEST_CASE("wcrps basics") {
  auto base = [](double y) { return normal_cdf(y); };
  CensoredCdf cz{CensoredCdf::Kind::full_model, -1.0, 0.95, base, 9.0};

  // q beyond the effective upper limit with x below q: zero weight region.
  CHECK(wcrps(cz, 0.5, 8.9) == doctest::Approx(0.0).epsilon(1e-6));

  // q at the censoring point equals the crps of the censored pair.
  double w = wcrps(cz, 0.5, -1.0);
  double c = crps([&cz](double y) { return cz(y); }, 0.5, -1.0, 9.0);
  CHECK(w == doctest::Approx(c).epsilon(1e-6));

  // Nonincreasing in q.
  double prev = w;
  for (double q : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    double cur = wcrps(cz, 0.5, q);
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }

  CHECK_THROWS_AS(wcrps(cz, 0.5, -2.0), std::domain_error);  // q below mu
  CHECK_THROWS_AS(wcrps(cz, -1.5, 0.0), std::domain_error);  // not censored
}

TEST_CASE("wcrps agrees between matched full-model and gpd censored cdfs") {
  // Full model whose conditional tail above mu is exactly the gpd: F_X(z) =
  // p + (1-p) F_gpd(z) for z >= mu. Both censored forms then coincide.
  const double mu = 1.0, p = 0.9;
  GpdParams tail{mu, 1.3, 0.15};
  auto full_cdf = [&](double z) { return p + (1.0 - p) * gpd_cdf(tail, z); };
  auto tail_cdf = [&](double z) { return gpd_cdf(tail, z); };
  CensoredCdf a{CensoredCdf::Kind::full_model, mu, p, full_cdf, 40.0};
  CensoredCdf b{CensoredCdf::Kind::gpd, mu, p, tail_cdf, 40.0};
  for (double x : {1.0, 1.7, 4.0}) {
    for (double q : {1.0, 2.0, 3.5}) {
      CHECK(wcrps(a, x, q) == doctest::Approx(wcrps(b, x, q)).epsilon(1e-8));
    }
  }
}

TEST_CASE("cv folds: deterministic blocking into 4s and 5s") {
  std::vector<int> twenty;
  for (int y = 1990; y < 2010; ++y) twenty.push_back(y);
  CvFolds f20 = make_cv_folds(twenty);
  // Valid partitions into consecutive blocks of 4/5 are {5,5,5,5} and
  // {4,4,4,4,4}; the documented rule takes the fewest folds.
  CHECK(f20.n_folds == 4);
  for (int k = 0; k < 4; ++k) CHECK(f20.years_of(k).size() == 5);

  std::vector<int> nine = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CvFolds f9 = make_cv_folds(nine);
  CHECK(f9.n_folds == 2);
  CHECK(f9.years_of(0).size() == 5);
  CHECK(f9.years_of(1).size() == 4);

  CHECK_THROWS_AS(make_cv_folds({1, 2, 3, 4, 5, 6, 7}), insufficient_data_error);
  std::vector<int> eleven;
  for (int y = 0; y < 11; ++y) eleven.push_back(y);
  CHECK_THROWS_AS(make_cv_folds(eleven), config_error);
}

TEST_CASE("cv folds are consecutive and disjoint for random ranges") {
  Rng rng(5150);
  for (int rep = 0; rep < 20; ++rep) {
    int n = 8 + static_cast<int>(rng.uniform_index(60));
    if (n == 11) continue;
    int y0 = 1900 + static_cast<int>(rng.uniform_index(100));
    std::vector<int> years;
    for (int i = 0; i < n; ++i) years.push_back(y0 + i);
    CvFolds folds = make_cv_folds(years);
    int prev_fold = 0;
    std::map<int, int> sizes;
    for (std::size_t i = 0; i < years.size(); ++i) {
      int f = folds.fold_of(years[i]);
      CHECK(f >= prev_fold);  // consecutive blocks
      prev_fold = f;
      sizes[f]++;
    }
    CHECK(static_cast<int>(sizes.size()) == folds.n_folds);
    for (const auto& [fold, size] : sizes) CHECK((size == 4 || size == 5));
  }
}

namespace {

std::vector<ScoredObs> fixture_scores(const std::vector<double>& values) {
  // Three folds, four observations each, spread over seasons.
  std::vector<ScoredObs> out;
  int months[] = {1, 4, 7, 10};
  std::size_t at = 0;
  for (int fold = 0; fold < 3; ++fold)
    for (int m : months)
      out.push_back({Date{2000 + fold, m, 10}, fold, values[at++]});
  return out;
}

}  // namespace

TEST_CASE("crps comparison table algebra") {
  std::vector<double> base = {1.0, 2.0, 3.0, 4.0, 2.0, 3.0, 4.0, 5.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<ScoredObs> a = fixture_scores(base);

  // Identical scores: all rows zero.
  std::vector<ComparisonRow> same = crps_comparison(a, a);
  REQUIRE(same.size() == 5);
  for (const auto& row : same) CHECK(row.value == doctest::Approx(0.0));

  // b = 2a elementwise: 100 (sum mean(a - 2a)) / sum mean(a) = -100.
  std::vector<double> doubled = base;
  for (double& v : doubled) v *= 2.0;
  std::vector<ScoredObs> b = fixture_scores(doubled);
  std::vector<ComparisonRow> rows = crps_comparison(a, b);
  for (const auto& row : rows) CHECK(row.value == doctest::Approx(-100.0));

  // Randomized scores vs the formula computed directly.
  Rng rng(9);
  std::vector<double> ra(12), rb(12);
  for (int i = 0; i < 12; ++i) {
    ra[i] = 0.5 + rng.uniform01();
    rb[i] = 0.5 + rng.uniform01();
  }
  std::vector<ComparisonRow> got = crps_comparison(fixture_scores(ra), fixture_scores(rb));
  // "Year" row: fold means over all four observations.
  double num = 0.0, den = 0.0;
  for (int fold = 0; fold < 3; ++fold) {
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < 4; ++i) {
      ma += ra[fold * 4 + i] / 4.0;
      mb += rb[fold * 4 + i] / 4.0;
    }
    num += ma - mb;
    den += ma;
  }
  CHECK(got[0].label == "Year");
  CHECK(got[0].value == doctest::Approx(100.0 * num / den).epsilon(1e-12));
  // Each season row has exactly one observation per fold.
  double num1 = 0.0, den1 = 0.0;
  for (int fold = 0; fold < 3; ++fold) {
    num1 += ra[fold * 4] - rb[fold * 4];
    den1 += ra[fold * 4];
  }
  CHECK(got[1].label == "DJF");
  CHECK(got[1].value == doctest::Approx(100.0 * num1 / den1).epsilon(1e-12));
}

TEST_CASE("wcrps comparison uses the reference-model denominator") {
  std::vector<double> base = {1.0, 2.0, 3.0, 4.0, 2.0, 3.0, 4.0, 5.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<ScoredObs> a = fixture_scores(base);
  std::vector<double> doubled = base;
  for (double& v : doubled) v *= 2.0;
  std::vector<ScoredObs> b = fixture_scores(doubled);

  CHECK(wcrps_comparison(a, a).value == doctest::Approx(0.0));
  // 100 (sum mean(a - 2a)) / sum mean(2a) = -50.
  CHECK(wcrps_comparison(a, b).value == doctest::Approx(-50.0));
}

TEST_CASE("comparison rejects misaligned score lists") {
  std::vector<double> v(12, 1.0);
  std::vector<ScoredObs> a = fixture_scores(v);
  std::vector<ScoredObs> b = a;
  b[3].date.day += 1;
  CHECK_THROWS_AS(crps_comparison(a, b), std::invalid_argument);
  b = a;
  b.pop_back();
  CHECK_THROWS_AS(wcrps_comparison(a, b), std::invalid_argument);
}

TEST_CASE("empty fold-season cells are excluded and reported") {
  // Fold 2 has no winter observation.
  std::vector<ScoredObs> a, b;
  int months[] = {1, 7};
  for (int fold = 0; fold < 3; ++fold) {
    for (int m : months) {
      if (fold == 2 && m == 1) continue;
      a.push_back({Date{2000 + fold, m, 1}, fold, 1.0});
      b.push_back({Date{2000 + fold, m, 1}, fold, 2.0});
    }
  }
  std::vector<ComparisonRow> rows = crps_comparison(a, b);
  const ComparisonRow& djf = rows[1];
  REQUIRE(djf.label == "DJF");
  CHECK(djf.folds_used == 2);
  REQUIRE(djf.excluded_folds.size() == 1);
  CHECK(djf.excluded_folds[0] == 2);
}

TEST_CASE("cross-validation never trains on the scored fold") {
  YearlyCovariate cov = testutil::linear_covariate(1990, 2009, 6.0, 0.0);
  SeasonalBatsModel truth = testutil::ground_truth_model(cov, {1990, 1, 1});
  Rng rng(31415);
  ObservationSeries data = testutil::simulate_daily(truth, 1990, 2009, rng);

  CvFolds folds = make_cv_folds(data.observation_years());
  CHECK(folds.n_folds == 4);

  // Test double: records the training years seen for each fold and scores
  // with a trivial function.
  std::map<int, std::vector<int>> train_seen;
  MakeScorers recorder = [&](const ObservationSeries& train,
                             const std::vector<int>& train_years, int fold) {
    train_seen[fold] = train_years;
    CHECK(train.size() > 0);
    std::vector<ScoreFn> fns;
    fns.push_back([](const Date&, double x) { return x; });
    return fns;
  };
  CvScores scores = run_cross_validation(data, folds, recorder);

  CHECK(train_seen.size() == static_cast<std::size_t>(folds.n_folds));
  for (int fold = 0; fold < folds.n_folds; ++fold) {
    std::vector<int> held = folds.years_of(fold);
    CHECK((held.size() == 4 || held.size() == 5));
    // Held years are consecutive.
    for (std::size_t i = 1; i < held.size(); ++i) CHECK(held[i] == held[i - 1] + 1);
    // No held year ever appears in that fold's training set.
    for (int y : held)
      CHECK(std::find(train_seen[fold].begin(), train_seen[fold].end(), y) ==
            train_seen[fold].end());
    // Training plus held covers all years.
    CHECK(train_seen[fold].size() + held.size() == data.observation_years().size());
  }

  // Every observation was scored exactly once, aligned across models.
  REQUIRE(scores.per_model.size() == 1);
  CHECK(scores.per_model[0].size() == data.size());
  for (std::size_t i = 0; i < scores.obs.size(); ++i)
    CHECK(scores.per_model[0][i].fold == folds.fold_of(scores.per_model[0][i].date.year));
}
