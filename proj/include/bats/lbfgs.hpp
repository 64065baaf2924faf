#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bats {

/// Objective callback: value at x, gradient filled when grad is non-null.
/// May return +inf (or NaN) for infeasible points; the line search treats
/// those as ordinary rejections.
using ObjectiveFn = std::function<double(std::span<const double>, std::vector<double>*)>;

struct LbfgsOptions {
  std::size_t max_iterations = 500;
  int memory = 10;
  /// Stop when |grad|_inf <= grad_tolerance * max(1, |f|).
  double grad_tolerance = 1e-8;
  /// Stop after two consecutive iterations improving less than
  /// f_tolerance * (1 + |f|).
  double f_tolerance = 1e-13;
};

struct LbfgsReport {
  double f = 0.0;
  double grad_inf = 0.0;
  std::size_t iterations = 0;
  bool converged = false;    // gradient criterion met
  bool made_progress = false;
  std::string message;
};

/// Limited-memory BFGS with Armijo backtracking. Curvature pairs with
/// non-positive s.y are skipped so the inverse-Hessian model stays positive
/// definite even without Wolfe steps. x is updated in place.
LbfgsReport lbfgs_minimize(const ObjectiveFn& objective, std::vector<double>& x,
                           const LbfgsOptions& options);

}  // namespace bats
