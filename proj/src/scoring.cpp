#include "bats/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bats/errors.hpp"

namespace bats {

Season season_of(const Date& date) {
  switch (date.month) {
    case 12:
    case 1:
    case 2:
      return Season::DJF;
    case 3:
    case 4:
    case 5:
      return Season::MAM;
    case 6:
    case 7:
    case 8:
      return Season::JJA;
    default:
      return Season::SON;
  }
}

const char* season_name(Season s) {
  switch (s) {
    case Season::DJF: return "DJF";
    case Season::MAM: return "MAM";
    case Season::JJA: return "JJA";
    default: return "SON";
  }
}

// ---------------------------------------------------------------------------
// Adaptive Simpson over (F - c)^2 with cdf sanity checks

namespace {

struct SquaredErrorIntegrand {
  const std::function<double(double)>& F;
  double c;  // indicator value on this segment, 0 or 1

  double value_at(double y, double Fy) const {
    double d = Fy - c;
    return d * d;
  }
};

void check_cdf_value(double Fv) {
  if (!(Fv > -1e-8) || !(Fv < 1.0 + 1e-8) || !std::isfinite(Fv))
    throw integrity_error("crps: cdf value outside [0,1]");
}

void check_monotone(double Fa, double Fm, double Fb) {
  if (Fm < Fa - 1e-8 || Fm > Fb + 1e-8)
    throw integrity_error("crps: cdf is not monotone on the integration range");
}

double simpson_recurse(const SquaredErrorIntegrand& g, double a, double b, double Fa,
                       double Fb, double fa, double fb, double whole, double fm,
                       double Fm, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double Flm = g.F(lm), Frm = g.F(rm);
  check_cdf_value(Flm);
  check_cdf_value(Frm);
  check_monotone(Fa, Flm, Fm);
  check_monotone(Fm, Frm, Fb);
  double flm = g.value_at(lm, Flm), frm = g.value_at(rm, Frm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_recurse(g, a, m, Fa, Fm, fa, fm, left, flm, Flm, 0.5 * tol, depth - 1) +
         simpson_recurse(g, m, b, Fm, Fb, fm, fb, right, frm, Frm, 0.5 * tol, depth - 1);
}

double integrate_segment(const std::function<double(double)>& F, double a, double b,
                         double c, double tol) {
  if (!(b > a)) return 0.0;
  SquaredErrorIntegrand g{F, c};
  double Fa = F(a), Fb = F(b), m = 0.5 * (a + b);
  double Fm = F(m);
  check_cdf_value(Fa);
  check_cdf_value(Fb);
  check_cdf_value(Fm);
  check_monotone(Fa, Fm, Fb);
  double fa = g.value_at(a, Fa), fb = g.value_at(b, Fb), fm = g.value_at(m, Fm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(g, a, b, Fa, Fb, fa, fb, whole, fm, Fm, tol, 48);
}

}  // namespace

double crps(const std::function<double(double)>& cdf, double x, double lo, double hi,
            double tol) {
  if (!std::isfinite(x)) throw std::domain_error("crps: observation must be finite");
  if (!(hi > lo)) throw std::domain_error("crps: integration bounds must satisfy lo < hi");
  lo = std::min(lo, x);
  hi = std::max(hi, x);
  // Below x the indicator is 0, above it is 1; split exactly at the step.
  double below = integrate_segment(cdf, lo, x, 0.0, 0.5 * tol);
  double above = integrate_segment(cdf, x, hi, 1.0, 0.5 * tol);
  return below + above;
}

double CensoredCdf::operator()(double z) const {
  if (z < mu) return 0.0;
  double f = underlying(z);
  double v = kind == Kind::full_model ? f : p_mu + (1.0 - p_mu) * f;
  if (v < 0.0) return 0.0;
  if (v > 1.0) return 1.0;
  return v;
}

double wcrps(const CensoredCdf& cz, double x_censored, double q, double tol) {
  if (!(q >= cz.mu))
    throw std::domain_error("wcrps: tail threshold q must not be below the censoring point");
  if (!(x_censored >= cz.mu))
    throw std::domain_error("wcrps: observation must already be censored at mu");
  double hi = std::max(cz.hi_bound, x_censored);
  if (!(hi > q)) return 0.0;
  std::function<double(double)> F = [&cz](double y) { return cz(y); };
  // Weight kills everything below q; the indicator step at x splits the rest.
  if (x_censored <= q) return integrate_segment(F, q, hi, 1.0, tol);
  double below = integrate_segment(F, q, x_censored, 0.0, 0.5 * tol);
  double above = integrate_segment(F, x_censored, hi, 1.0, 0.5 * tol);
  return below + above;
}

// ---------------------------------------------------------------------------
// Cross-validation folds

int CvFolds::fold_of(int year) const {
  auto it = std::lower_bound(years.begin(), years.end(), year);
  if (it == years.end() || *it != year)
    throw std::out_of_range("fold_of: year " + std::to_string(year) + " not in folds");
  return fold_of_year[static_cast<std::size_t>(it - years.begin())];
}

std::vector<int> CvFolds::years_of(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < years.size(); ++i)
    if (fold_of_year[i] == fold) out.push_back(years[i]);
  return out;
}

CvFolds make_cv_folds(const std::vector<int>& years) {
  const std::size_t n = years.size();
  if (n < 8)
    throw insufficient_data_error("make_cv_folds: need at least 8 observation years");
  for (std::size_t i = 1; i < n; ++i)
    if (years[i] <= years[i - 1])
      throw std::invalid_argument("make_cv_folds: years must be strictly increasing");
  if (n == 11)
    throw config_error("make_cv_folds: 11 years cannot be split into blocks of 4 or 5");

  const std::size_t k = (n + 4) / 5;  // fewest folds with blocks of at most 5
  const std::size_t base = n / k;
  const std::size_t extra = n % k;  // earliest folds take the remainder

  CvFolds folds;
  folds.years = years;
  folds.fold_of_year.resize(n);
  folds.n_folds = static_cast<int>(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t len = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j) folds.fold_of_year[at++] = static_cast<int>(f);
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Comparison formulas

namespace {

struct FoldCell {
  double sum = 0.0;
  std::size_t n = 0;
};

void check_aligned(const std::vector<ScoredObs>& a, const std::vector<ScoredObs>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("score comparison: score lists differ in length");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].date == b[i].date) || a[i].fold != b[i].fold)
      throw std::invalid_argument(
          "score comparison: score lists are not aligned on identical observations");
}

// 100 * sum_k mean_k(a - b) / sum_k mean_k(den), with den either a or b.
// Folds absent from the cell maps had no observations in this row and are
// reported as excluded.
ComparisonRow compare_cells(const std::map<int, FoldCell>& diff,
                            const std::map<int, FoldCell>& den,
                            const std::vector<int>& all_folds, const std::string& label) {
  ComparisonRow row;
  row.label = label;
  double num_sum = 0.0, den_sum = 0.0;
  for (int fold : all_folds) {
    auto it = diff.find(fold);
    if (it == diff.end()) {
      row.excluded_folds.push_back(fold);
      continue;
    }
    const FoldCell& cell = it->second;
    const FoldCell& dcell = den.at(fold);
    num_sum += cell.sum / cell.n;
    den_sum += dcell.sum / dcell.n;
    ++row.folds_used;
  }
  row.value = den_sum == 0.0 ? 0.0 : 100.0 * num_sum / den_sum;
  return row;
}

std::vector<int> fold_universe(const std::vector<ScoredObs>& a) {
  std::vector<int> folds;
  for (const ScoredObs& o : a) folds.push_back(o.fold);
  std::sort(folds.begin(), folds.end());
  folds.erase(std::unique(folds.begin(), folds.end()), folds.end());
  return folds;
}

}  // namespace

std::vector<ComparisonRow> crps_comparison(const std::vector<ScoredObs>& a,
                                           const std::vector<ScoredObs>& b) {
  check_aligned(a, b);
  // Row keys: -1 for the whole year, otherwise the season index.
  auto rows = std::vector<std::pair<int, std::string>>{
      {-1, "Year"}, {0, "DJF"}, {1, "MAM"}, {2, "JJA"}, {3, "SON"}};
  std::vector<int> all_folds = fold_universe(a);
  std::vector<ComparisonRow> out;
  for (const auto& [key, label] : rows) {
    std::map<int, FoldCell> diff, den;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (key >= 0 && static_cast<int>(season_of(a[i].date)) != key) continue;
      FoldCell& dc = diff[a[i].fold];
      FoldCell& nc = den[a[i].fold];
      dc.sum += a[i].score - b[i].score;
      nc.sum += a[i].score;  // denominator is the first model
      ++dc.n;
      ++nc.n;
    }
    out.push_back(compare_cells(diff, den, all_folds, label));
  }
  return out;
}

ComparisonRow wcrps_comparison(const std::vector<ScoredObs>& a,
                               const std::vector<ScoredObs>& b) {
  check_aligned(a, b);
  std::map<int, FoldCell> diff, den;
  for (std::size_t i = 0; i < a.size(); ++i) {
    FoldCell& dc = diff[a[i].fold];
    FoldCell& nc = den[a[i].fold];
    dc.sum += a[i].score - b[i].score;
    nc.sum += b[i].score;  // denominator is the reference (GPD) model
    ++dc.n;
    ++nc.n;
  }
  return compare_cells(diff, den, fold_universe(a), "tail");
}

// ---------------------------------------------------------------------------
// Cross-validation runner

CvScores run_cross_validation(const ObservationSeries& data, const CvFolds& folds,
                              const MakeScorers& make_scorers) {
  CvScores out;
  for (int fold = 0; fold < folds.n_folds; ++fold) {
    std::vector<int> held = folds.years_of(fold);
    ObservationSeries train = data.filter_years([&](int year) {
      return !std::binary_search(held.begin(), held.end(), year);
    });
    std::vector<int> train_years = train.observation_years();
    std::vector<ScoreFn> scorers = make_scorers(train, train_years, fold);
    if (out.per_model.empty()) out.per_model.resize(scorers.size());
    if (scorers.size() != out.per_model.size())
      throw std::invalid_argument("run_cross_validation: model count changed across folds");

    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::binary_search(held.begin(), held.end(), data.dates[i].year)) continue;
      out.obs.push_back({data.dates[i], fold, 0.0});
      for (std::size_t mdl = 0; mdl < scorers.size(); ++mdl)
        out.per_model[mdl].push_back(
            {data.dates[i], fold, scorers[mdl](data.dates[i], data.values[i])});
    }
  }
  return out;
}

}  // namespace bats
