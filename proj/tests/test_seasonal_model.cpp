#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bats/likelihood.hpp"
#include "bats/model_io.hpp"
#include "bats/rng.hpp"
#include "bats/seasonal_model.hpp"

using namespace bats;

namespace {

YearlyCovariate demo_covariate() {
  std::vector<int> years;
  std::vector<double> values;
  for (int y = 1950; y <= 2020; ++y) {
    years.push_back(y);
    values.push_back(5.6 + 0.01 * (y - 1950));
  }
  return YearlyCovariate(years, values);
}

SeasonalBatsModel blank_model() {
  SeasonalBatsModel m;
  m.basis = build_periodic_spline_basis(8, kDaysPerYear);
  m.covariate = demo_covariate();
  m.station_id = "TEST";
  m.first_obs = {1950, 1, 1};
  m.loc_lower.spline.assign(8, 0.0);
  m.loc_upper.spline.assign(8, 0.0);
  m.scale_lower.spline.assign(8, 0.0);
  m.scale_upper.spline.assign(8, 0.0);
  return m;
}

SeasonalBatsModel randomized_model(Rng& rng) {
  SeasonalBatsModel m = blank_model();
  auto u = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
  m.loc_lower.intercept = u(-8.0, -2.0);
  m.loc_upper.intercept = u(2.0, 8.0);
  for (int j = 0; j < 8; ++j) {
    m.loc_lower.spline[j] = u(-4.0, 4.0);
    m.loc_upper.spline[j] = u(-4.0, 4.0);
    m.scale_lower.spline[j] = u(-0.3, 0.3);
    m.scale_upper.spline[j] = u(-0.3, 0.3);
  }
  m.loc_lower.trend = u(-0.5, 0.5);
  m.loc_lower.trend_cos = u(-0.3, 0.3);
  m.loc_lower.trend_sin = u(-0.3, 0.3);
  m.loc_upper.trend = u(-0.5, 0.5);
  m.loc_upper.trend_cos = u(-0.3, 0.3);
  m.loc_upper.trend_sin = u(-0.3, 0.3);
  m.scale_lower.intercept = u(0.5, 1.5);
  m.scale_upper.intercept = u(0.5, 1.5);
  m.kappa0 = u(-0.3, 0.3);
  m.kappa1 = u(-0.3, 0.3);
  m.log_nu = std::log(u(5.0, 20.0));
  return m;
}

}  // namespace

TEST_CASE("free parameter count is 45 with the default basis") {
  CHECK(blank_model().param_count() == 45);
  CHECK(pack_bats(blank_model()).size() == 45);
}

TEST_CASE("params_at with zero coefficients is constant") {
  SeasonalBatsModel m = blank_model();
  m.loc_lower.intercept = -4.0;
  m.loc_upper.intercept = 3.0;
  for (double d : {0.0, 17.4, 182.0, 364.0}) {
    for (int y : {1950, 1987, 2020}) {
      BatsParams p = params_at(m, {d, y});
      CHECK(p.phi0 == doctest::Approx(-4.0).epsilon(1e-14));
      CHECK(p.phi1 == doctest::Approx(3.0).epsilon(1e-14));
      CHECK(p.tau0 == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(p.nu == doctest::Approx(10.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("pure covariate trend shifts the location by the covariate change") {
  SeasonalBatsModel m = blank_model();
  m.loc_upper.trend = 1.0;
  double dC = m.covariate.at(2010) - m.covariate.at(1980);
  for (double d : {0.0, 91.3, 250.0}) {
    double a = params_at(m, {d, 1980}).phi1;
    double b = params_at(m, {d, 2010}).phi1;
    CHECK(b - a == doctest::Approx(dC).epsilon(1e-12));
  }
}

TEST_CASE("params_at matches an independent dot product") {
  Rng rng(1234);
  SeasonalBatsModel m = randomized_model(rng);
  const double d = 37.5;
  const int year = 1999;
  BatsParams p = params_at(m, {d, year});

  std::vector<double> S = m.basis.evaluate(d);
  auto [cd, sd] = harmonic_pair(d);
  double C = m.covariate.at(year);
  double phi1 = m.loc_upper.intercept;
  double phi0 = m.loc_lower.intercept;
  double lt0 = m.scale_lower.intercept;
  double lt1 = m.scale_upper.intercept;
  for (int j = 0; j < 8; ++j) {
    phi1 += m.loc_upper.spline[j] * S[j];
    phi0 += m.loc_lower.spline[j] * S[j];
    lt0 += m.scale_lower.spline[j] * S[j];
    lt1 += m.scale_upper.spline[j] * S[j];
  }
  phi1 += C * (m.loc_upper.trend + m.loc_upper.trend_cos * cd + m.loc_upper.trend_sin * sd);
  phi0 += C * (m.loc_lower.trend + m.loc_lower.trend_cos * cd + m.loc_lower.trend_sin * sd);

  CHECK(p.phi0 == doctest::Approx(phi0).epsilon(1e-13));
  CHECK(p.phi1 == doctest::Approx(phi1).epsilon(1e-13));
  CHECK(p.tau0 == doctest::Approx(std::exp(lt0)).epsilon(1e-13));
  CHECK(p.tau1 == doctest::Approx(std::exp(lt1)).epsilon(1e-13));
}

TEST_CASE("params_at names the missing covariate year") {
  SeasonalBatsModel m = blank_model();
  CHECK_THROWS_WITH_AS(params_at(m, {10.0, 2030}), doctest::Contains("2030"),
                       std::out_of_range);
}

TEST_CASE("location is linear and scale log-linear in the coefficients") {
  Rng rng(55);
  SeasonalBatsModel m = randomized_model(rng);
  SeasonalBatsModel doubled = m;
  doubled.loc_upper.intercept *= 2.0;
  for (auto& v : doubled.loc_upper.spline) v *= 2.0;
  doubled.loc_upper.trend *= 2.0;
  doubled.loc_upper.trend_cos *= 2.0;
  doubled.loc_upper.trend_sin *= 2.0;
  SeasonalBatsModel shifted = m;
  shifted.scale_lower.intercept += 0.7;

  DayIndex idx{123.0, 1990};
  CHECK(params_at(doubled, idx).phi1 ==
        doctest::Approx(2.0 * params_at(m, idx).phi1).epsilon(1e-12));
  CHECK(params_at(shifted, idx).tau0 ==
        doctest::Approx(std::exp(0.7) * params_at(m, idx).tau0).epsilon(1e-12));
}

TEST_CASE("quantile curves: stationary symmetric model is flat at the midpoint") {
  SeasonalBatsModel m = blank_model();
  m.loc_lower.intercept = -2.0;
  m.loc_upper.intercept = 2.0;
  std::vector<double> mid = quantile_curve(m, 0.5, 1980);
  for (double v : mid) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("quantile curves never cross") {
  Rng rng(321);
  SeasonalBatsModel m = randomized_model(rng);
  std::vector<double> lo = quantile_curve(m, 0.25, 2000);
  std::vector<double> hi = quantile_curve(m, 0.75, 2000);
  for (int d = 0; d < kDayGrid; ++d) CHECK(lo[d] < hi[d]);
}

TEST_CASE("quantile curve spot value matches the instantaneous quantile") {
  Rng rng(9);
  SeasonalBatsModel m = randomized_model(rng);
  std::vector<double> curve = quantile_curve(m, 0.9, 1995);
  BatsParams p = params_at(m, {200.0, 1995});
  CHECK(curve[200] == doctest::Approx(bats_quantile(p, 0.9)).epsilon(1e-10));
}

TEST_CASE("quantile change basics") {
  Rng rng(27);
  SeasonalBatsModel m = randomized_model(rng);
  std::vector<double> zero = quantile_change(m, 0.5, 1999, 1999);
  for (double v : zero) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));

  SeasonalBatsModel no_trend = m;
  no_trend.loc_lower.trend = no_trend.loc_lower.trend_cos = no_trend.loc_lower.trend_sin = 0.0;
  no_trend.loc_upper.trend = no_trend.loc_upper.trend_cos = no_trend.loc_upper.trend_sin = 0.0;
  std::vector<double> a = quantile_change(no_trend, 0.9, 1960, 1980);
  std::vector<double> b = quantile_change(no_trend, 0.9, 1960, 2010);
  for (int d = 0; d < kDayGrid; ++d) CHECK(a[d] == doctest::Approx(b[d]).epsilon(1e-12));

  std::vector<double> direct = quantile_curve(m, 0.9, 2010);
  std::vector<double> base = quantile_curve(m, 0.5, 1960);
  std::vector<double> change = quantile_change(m, 0.9, 1960, 2010);
  for (int d = 0; d < kDayGrid; ++d)
    CHECK(change[d] == doctest::Approx(direct[d] - base[d]).epsilon(1e-12));

  std::vector<double> same_q = quantile_change(m, 0.9, 1960, 2010, ChangeBaseline::same_quantile);
  std::vector<double> base_q = quantile_curve(m, 0.9, 1960);
  for (int d = 0; d < kDayGrid; ++d)
    CHECK(same_q[d] == doctest::Approx(direct[d] - base_q[d]).epsilon(1e-12));
}

TEST_CASE("quantile spreads are positive and symmetric cases match") {
  SeasonalBatsModel sym = blank_model();
  sym.loc_lower.intercept = -1.0;
  sym.loc_upper.intercept = 1.0;
  QuantileSpreads qs = quantile_spreads(sym, 1990);
  for (const auto& curve : qs.daily)
    for (double v : curve) CHECK(v > 0.0);
  // Symmetric model: q0.25-q0.05 equals q0.95-q0.75.
  CHECK(qs.annual_mean[3] == doctest::Approx(qs.annual_mean[1]).epsilon(1e-7));

  Rng rng(88);
  SeasonalBatsModel m = randomized_model(rng);
  QuantileSpreads r = quantile_spreads(m, 2000);
  std::vector<double> hi = quantile_curve(m, 0.99, 2000);
  std::vector<double> lo = quantile_curve(m, 0.95, 2000);
  for (int d = 0; d < kDayGrid; ++d)
    CHECK(r.daily[0][d] == doctest::Approx(hi[d] - lo[d]).epsilon(1e-10));
}

TEST_CASE("skew-normal seasonal model") {
  SeasonalSkewNormalModel m;
  m.basis = build_periodic_spline_basis(8, kDaysPerYear);
  m.covariate = demo_covariate();
  m.first_obs = {1950, 1, 1};
  m.loc.spline.assign(8, 0.0);
  m.log_scale.spline.assign(8, 0.0);
  m.skew.spline.assign(8, 0.0);
  m.loc.intercept = 5.0;
  m.skew.intercept = 1.5;
  CHECK(m.param_count() == 30);

  SkewNormalParams p = skew_params_at(m, {33.0, 1990});
  CHECK(p.mu == 5.0);
  CHECK(p.sigma == 1.0);
  CHECK(p.alpha == 1.5);

  // Skewness never depends on the covariate year.
  m.loc.trend = 2.0;
  SkewNormalParams a = skew_params_at(m, {33.0, 1960});
  SkewNormalParams b = skew_params_at(m, {33.0, 2015});
  CHECK(a.alpha == b.alpha);
  CHECK(a.mu != b.mu);
}

TEST_CASE("gpd seasonal model evaluates its frozen threshold") {
  SeasonalGpdModel m;
  m.basis = build_periodic_spline_basis(8, kDaysPerYear);
  m.covariate = demo_covariate();
  m.first_obs = {1950, 1, 1};
  m.threshold.spline.assign(8, 2.0);  // partition of unity -> flat at 2
  m.log_scale.spline.assign(8, 0.0);
  m.xi = -0.1;
  CHECK(m.param_count() == 13);

  GpdParams p = gpd_params_at(m, {100.0, 1990});
  CHECK(p.mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.xi == -0.1);
}

TEST_CASE("skew and gpd documents round-trip byte-identically") {
  ModelDocument sdoc;
  sdoc.kind = ModelDocument::Kind::skew_normal;
  SeasonalSkewNormalModel sm;
  sm.basis = build_periodic_spline_basis(8, kDaysPerYear);
  sm.covariate = demo_covariate();
  sm.station_id = "SK";
  sm.first_obs = {1960, 3, 4};
  sm.loc.spline.assign(8, 0.25);
  sm.loc.intercept = 3.5;
  sm.loc.trend = 0.125;
  sm.log_scale.spline.assign(8, -0.175);
  sm.skew.spline.assign(8, 0.0625);
  sm.skew.intercept = -1.0 / 3.0;
  sdoc.skew = sm;
  std::string stext = to_json_text(sdoc);
  CHECK(to_json_text(from_json_text(stext)) == stext);

  ModelDocument gdoc;
  gdoc.kind = ModelDocument::Kind::gpd;
  SeasonalGpdModel gm;
  gm.basis = build_periodic_spline_basis(8, kDaysPerYear);
  gm.covariate = demo_covariate();
  gm.station_id = "GP";
  gm.first_obs = {1971, 7, 9};
  gm.threshold.spline.assign(8, 21.7);
  gm.log_scale.spline.assign(8, 0.01);
  gm.log_scale.trend_sin = -0.7;
  gm.xi = -0.123456789012345;
  gm.tail = Tail::lower;
  gm.p_mu = 0.95;
  gdoc.gpd = gm;
  std::string gtext = to_json_text(gdoc);
  ModelDocument gback = from_json_text(gtext);
  CHECK(to_json_text(gback) == gtext);
  CHECK(gback.gpd->tail == Tail::lower);
  CHECK(gback.gpd->xi == gm.xi);
}

TEST_CASE("model document round-trips byte-identically") {
  Rng rng(4321);
  ModelDocument doc;
  doc.kind = ModelDocument::Kind::bats;
  doc.bats = randomized_model(rng);
  doc.diagnostics.neg_loglik = 12345.678901234567;
  doc.diagnostics.converged = true;
  doc.diagnostics.iterations = 321;
  doc.diagnostics.gradient_norm = 3.25e-7;
  doc.diagnostics.init_used = pack_bats(*doc.bats);

  std::string text = to_json_text(doc);
  ModelDocument back = from_json_text(text);
  CHECK(to_json_text(back) == text);
  CHECK(pack_bats(*back.bats) == pack_bats(*doc.bats));
  CHECK(back.bats->covariate == doc.bats->covariate);
  CHECK(back.bats->basis == doc.bats->basis);
  CHECK(back.diagnostics.neg_loglik == doc.diagnostics.neg_loglik);
}
