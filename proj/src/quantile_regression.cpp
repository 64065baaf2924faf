#include "bats/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bats/errors.hpp"

namespace bats {

double pinball_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double tau) {
  double total = 0.0;
  Eigen::VectorXd r = y - X * beta;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    total += r[i] * (tau - (r[i] < 0.0 ? 1.0 : 0.0));
  return total;
}

namespace {

// One stage of majorize-minimize steps at fixed smoothing eps: weighted
// least squares with weights 1/(2 max(eps, |r_i|)) plus the constant
// pinball tilt (tau - 1/2).
Eigen::VectorXd mm_stage(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                         Eigen::VectorXd beta, double eps, int max_steps) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::VectorXd xt1 = X.colwise().sum();
  for (int step = 0; step < max_steps; ++step) {
    Eigen::VectorXd r = y - X * beta;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = 0.5 / std::max(eps, std::fabs(r[i]));
    Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd rhs = X.transpose() * (w.asDiagonal() * y) + (tau - 0.5) * xt1;
    Eigen::VectorXd next = xtwx.ldlt().solve(rhs);
    double move = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (move < 1e-14 * (1.0 + beta.cwiseAbs().maxCoeff())) break;
  }
  (void)p;
  return beta;
}

// Exact optima of the pinball loss interpolate p observations; try the
// subsets nearest the smoothed solution and keep the best.
void vertex_polish(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                   Eigen::VectorXd& beta, double& best_obj) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::VectorXd r = y - X * beta;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::fabs(r[a]) < std::fabs(r[b]);
  });
  const Eigen::Index k = std::min<Eigen::Index>(n, p + 4);

  std::vector<Eigen::Index> subset(p);
  std::vector<int> pick(k, 0);
  std::fill(pick.begin(), pick.begin() + p, 1);
  // Iterate all C(k, p) combinations of the k nearest-to-fit points.
  std::sort(pick.begin(), pick.end(), std::greater<int>());
  do {
    Eigen::Index s = 0;
    for (Eigen::Index i = 0; i < k; ++i)
      if (pick[i]) subset[s++] = order[i];
    Eigen::MatrixXd Xs(p, p);
    Eigen::VectorXd ys(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      Xs.row(i) = X.row(subset[i]);
      ys[i] = y[subset[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Xs);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd cand = lu.solve(ys);
    double obj = pinball_loss(X, y, cand, tau);
    if (obj < best_obj) {
      best_obj = obj;
      beta = cand;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
}

}  // namespace

Eigen::VectorXd quantile_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::domain_error("quantile_regression: tau must be in (0,1)");
  const Eigen::Index n = X.rows(), p = X.cols();
  if (X.rows() != y.size())
    throw std::invalid_argument("quantile_regression: design/response size mismatch");
  if (n <= p)
    throw insufficient_data_error("quantile_regression: need more observations than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw integrity_error("quantile_regression: design is rank deficient");

  Eigen::VectorXd beta = qr.solve(y);  // least squares start
  double scale = (y - X * beta).cwiseAbs().maxCoeff();
  double eps = std::max(1e-3, 0.25 * scale);
  while (eps > 1e-13) {
    beta = mm_stage(X, y, tau, beta, eps, 30);
    eps *= 0.1;
  }
  double best = pinball_loss(X, y, beta, tau);
  vertex_polish(X, y, tau, beta, best);
  return beta;
}

}  // namespace bats
