#pragma once

#include <Eigen/Dense>

namespace bats {

/// Pinball (check) loss sum_i rho_tau(y_i - x_i beta).
double pinball_loss(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                    const Eigen::VectorXd& beta, double tau);

/// Linear quantile regression: minimizes the pinball loss by smoothed
/// iteratively-reweighted least squares with a decreasing smoothing
/// parameter, then polishes onto the exact optimal vertex (the fit that
/// interpolates p observations). Requires n > p and a full-column-rank
/// design; throws integrity_error otherwise.
Eigen::VectorXd quantile_regression(const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& response, double tau);

}  // namespace bats
