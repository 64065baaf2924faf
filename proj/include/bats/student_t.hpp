#pragma once

namespace bats {

/// Student-t with real (non-integer allowed) degrees of freedom. Backed by
/// the log-gamma / regularized incomplete beta machinery; cdf and quantile
/// are mutual inverses to better than 1e-10.
double student_t_pdf(double nu, double x);
double student_t_log_pdf(double nu, double x);
double student_t_cdf(double nu, double x);
/// Upper tail probability P(X > x); accurate for survival values far below
/// double-epsilon of 1.
double student_t_survival(double nu, double x);
double student_t_quantile(double nu, double q);
/// Quantile parameterized by the upper tail probability s = 1 - q; usable
/// for s down to ~1e-300.
double student_t_quantile_from_survival(double nu, double s);

/// d/dx log t_nu(x).
double student_t_log_pdf_dx(double nu, double x);
/// d/dnu log t_nu(x).
double student_t_log_pdf_dnu(double nu, double x);

}  // namespace bats
