#include "bats/kde.hpp"

#include <cmath>

#include "bats/errors.hpp"
#include "bats/math.hpp"

namespace bats {

KdeResult windowed_kde(const ObservationSeries& data, double day, int half_window,
                       const std::vector<double>& eval_points,
                       std::optional<double> bandwidth) {
  if (half_window < 0) throw config_error("windowed_kde: half_window must be >= 0");
  std::vector<double> pool;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double d = day_of_year(data.dates[i], data.first_obs);
    double delta = std::fabs(std::fmod(d - day, kDaysPerYear));
    double dist = std::min(delta, kDaysPerYear - delta);
    if (dist <= half_window) pool.push_back(data.values[i]);
  }
  if (pool.empty())
    throw insufficient_data_error("windowed_kde: no observations in the day window");

  KdeResult out;
  out.n_pooled = pool.size();
  if (bandwidth) {
    out.bandwidth = *bandwidth;
    out.bandwidth_rule = "user";
    if (!(out.bandwidth > 0.0)) throw config_error("windowed_kde: bandwidth must be > 0");
  } else {
    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= pool.size();
    double ss = 0.0;
    for (double v : pool) ss += (v - mean) * (v - mean);
    double sd = pool.size() > 1 ? std::sqrt(ss / (pool.size() - 1)) : 0.0;
    if (!(sd > 0.0))
      throw numerical_error(
          "windowed_kde: pooled values have zero spread; pass a bandwidth explicitly");
    out.bandwidth = 1.06 * sd * std::pow(static_cast<double>(pool.size()), -0.2);
    out.bandwidth_rule = "normal-reference";
  }

  out.density.resize(eval_points.size());
  const double inv_nh = 1.0 / (out.bandwidth * pool.size());
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    double acc = 0.0;
    for (double v : pool) acc += normal_pdf((eval_points[k] - v) / out.bandwidth);
    out.density[k] = acc * inv_nh;
  }
  return out;
}

}  // namespace bats
