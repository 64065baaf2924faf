#include "bats/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bats/errors.hpp"

namespace bats {

std::vector<int> stratified_resample(const std::vector<int>& years,
                                     const BootstrapPlan& plan, Rng& rng) {
  if (years.empty()) throw std::invalid_argument("stratified_resample: no years");
  // Group by decade, preserving each decade's original count.
  std::map<int, std::vector<int>> by_decade;
  for (int y : years) by_decade[BootstrapPlan::decade_of(y)].push_back(y);
  std::vector<int> out;
  out.reserve(years.size());
  for (const auto& [decade, members] : by_decade) {
    for (std::size_t i = 0; i < members.size(); ++i)
      out.push_back(members[rng.uniform_index(members.size())]);
  }
  return out;
}

BootstrapResult bootstrap_fits(const ObservationSeries& data, const BootstrapPlan& plan,
                               const RefitFn& refit) {
  const std::vector<int> years = data.observation_years();
  SeedSequence seeds(plan.rng_seed);

  BootstrapResult result;
  result.replicate_values.resize(plan.n_replicates);
  result.converged.assign(plan.n_replicates, false);

  for (std::size_t rep = 0; rep < plan.n_replicates; ++rep) {
    Rng rng = seeds.stream(rep);
    std::vector<int> drawn = stratified_resample(years, plan, rng);

    std::map<int, double> multiplicity;
    for (int y : drawn) multiplicity[y] += 1.0;
    std::vector<double> weights(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto it = multiplicity.find(data.dates[i].year);
      weights[i] = it == multiplicity.end() ? 0.0 : it->second;
    }

    ReplicateFit fit = refit(data, weights);
    result.converged[rep] = fit.converged;
    if (!fit.converged) ++result.n_failed;
    result.replicate_values[rep] = std::move(fit.functionals);
  }
  return result;
}

std::pair<double, double> percentile_ci(std::vector<double> values, double level) {
  if (values.size() < 20)
    throw insufficient_data_error("percentile_ci: need at least 20 values");
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("percentile_ci: level must be in (0,1)");
  std::sort(values.begin(), values.end());
  auto interp = [&](double p) {
    double h = (static_cast<double>(values.size()) - 1.0) * p;
    std::size_t k = static_cast<std::size_t>(std::floor(h));
    if (k + 1 >= values.size()) return values.back();
    double frac = h - static_cast<double>(k);
    return values[k] + frac * (values[k + 1] - values[k]);
  };
  double alpha = 0.5 * (1.0 - level);
  return {interp(alpha), interp(1.0 - alpha)};
}

std::vector<FunctionalCi> bootstrap_cis(const BootstrapResult& result, double level) {
  std::size_t dim = 0;
  for (const auto& row : result.replicate_values)
    dim = std::max(dim, row.size());
  const std::size_t n_total = result.replicate_values.size();
  const bool reliable = result.n_failed * 10 <= n_total;  // >10% failed -> unreliable

  std::vector<FunctionalCi> out(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<double> column;
    column.reserve(n_total);
    for (std::size_t rep = 0; rep < n_total; ++rep) {
      if (!result.converged[rep]) continue;  // excluded but counted in n_failed
      if (j < result.replicate_values[rep].size())
        column.push_back(result.replicate_values[rep][j]);
    }
    FunctionalCi ci;
    ci.n_used = column.size();
    ci.reliable = reliable;
    auto [lo, hi] = percentile_ci(std::move(column), level);
    ci.lo = lo;
    ci.hi = hi;
    out[j] = ci;
  }
  return out;
}

}  // namespace bats
