#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bats/bats_distribution.hpp"
#include "bats/rng.hpp"

namespace testutil {

/// Independent quadrature oracle (adaptive Gauss-Kronrod, abs tol 1e-9).
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-9) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, tol);
}

/// Central finite difference d/dx with relative step.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double rel_step = 1e-6) {
  double h = rel_step * std::max(1.0, std::fabs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Valid random parameter set away from branch boundaries: nu in [2, 30],
/// shapes in +-[0.02, 0.45] (constraint satisfied since nu >= 2).
inline bats::BatsParams random_params(bats::Rng& rng) {
  bats::BatsParams p;
  p.nu = std::exp(std::log(2.0) + rng.uniform01() * (std::log(30.0) - std::log(2.0)));
  p.phi0 = -3.0 + 4.0 * rng.uniform01();
  p.phi1 = -1.0 + 4.0 * rng.uniform01();
  p.tau0 = std::exp(std::log(0.3) + rng.uniform01() * std::log(5.0 / 0.3));
  p.tau1 = std::exp(std::log(0.3) + rng.uniform01() * std::log(5.0 / 0.3));
  auto shape = [&rng]() {
    double mag = 0.02 + 0.43 * rng.uniform01();
    return rng.uniform01() < 0.5 ? -mag : mag;
  };
  p.kappa0 = shape();
  p.kappa1 = shape();
  return p;
}

/// Closed-form CRPS of a N(mu, sigma^2) forecast against observation x.
inline double gaussian_crps(double mu, double sigma, double x) {
  double z = (x - mu) / sigma;
  double Phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
  double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  return sigma * (z * (2.0 * Phi - 1.0) + 2.0 * phi - 1.0 / std::sqrt(3.14159265358979323846));
}

}  // namespace testutil
