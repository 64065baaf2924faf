#include "bats/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace bats {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsReport lbfgs_minimize(const ObjectiveFn& objective, std::vector<double>& x,
                           const LbfgsOptions& options) {
  const std::size_t n = x.size();
  LbfgsReport report;

  std::vector<double> grad(n), new_grad(n), direction(n), trial(n);
  double f = objective(x, &grad);
  if (!std::isfinite(f)) {
    report.f = f;
    report.message = "objective not finite at the starting point";
    return report;
  }

  std::deque<Pair> history;
  double gamma = 1.0;  // initial inverse-Hessian scale
  int stalled = 0;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    report.f = f;
    report.grad_inf = inf_norm(grad);
    if (report.grad_inf <= options.grad_tolerance * std::max(1.0, std::fabs(f))) {
      report.converged = true;
      report.message = "gradient tolerance reached";
      return report;
    }

    // Two-loop recursion for direction = -H grad.
    direction = grad;
    std::vector<double> alphas(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const Pair& p = history[k];
      alphas[k] = p.rho * dot(p.s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alphas[k] * p.y[i];
    }
    for (std::size_t i = 0; i < n; ++i) direction[i] *= gamma;
    for (std::size_t k = 0; k < history.size(); ++k) {
      const Pair& p = history[k];
      double beta = p.rho * dot(p.y, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += (alphas[k] - beta) * p.s[i];
    }
    for (std::size_t i = 0; i < n; ++i) direction[i] = -direction[i];

    double slope = dot(grad, direction);
    if (!(slope < 0.0)) {
      // Model went bad; fall back to steepest descent.
      history.clear();
      gamma = 1.0 / std::max(1.0, report.grad_inf);
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i] * gamma;
      slope = dot(grad, direction);
      if (!(slope < 0.0)) {
        report.message = "no descent direction";
        return report;
      }
    }

    // Backtracking Armijo search; infeasible (inf/nan) trials just shrink.
    constexpr double kArmijo = 1e-4;
    double step = history.empty() ? std::min(1.0, 1.0 / std::max(1.0, report.grad_inf)) : 1.0;
    double f_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * direction[i];
      f_trial = objective(trial, &new_grad);
      if (std::isfinite(f_trial) && f_trial <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      report.message = "line search failed";
      return report;
    }

    // Curvature pair from the accepted step.
    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = trial[i] - x[i];
      p.y[i] = new_grad[i] - grad[i];
    }
    double sy = dot(p.s, p.y);
    double yy = dot(p.y, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s)) * std::sqrt(yy) && yy > 0.0) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (history.size() > static_cast<std::size_t>(options.memory)) history.pop_front();
      gamma = sy / yy;
    }

    double improved = f - f_trial;
    x = trial;
    f = f_trial;
    grad = new_grad;
    report.iterations = iter + 1;
    report.made_progress = true;

    if (improved <= options.f_tolerance * (1.0 + std::fabs(f))) {
      if (++stalled >= 2) {
        report.f = f;
        report.grad_inf = inf_norm(grad);
        report.converged =
            report.grad_inf <= options.grad_tolerance * std::max(1.0, std::fabs(f));
        report.message = "function progress exhausted";
        return report;
      }
    } else {
      stalled = 0;
    }
  }

  report.f = f;
  report.grad_inf = inf_norm(grad);
  report.converged = report.grad_inf <= options.grad_tolerance * std::max(1.0, std::fabs(f));
  report.message = "iteration limit reached";
  return report;
}

}  // namespace bats
