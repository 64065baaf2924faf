#include "bats/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bats/errors.hpp"
#include "bats/math.hpp"
#include "bats/student_t.hpp"

namespace bats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Smooth barrier applied to out-of-support observations during fitting:
// penalty = kPenaltyBase + kPenaltyQuad * distance^2, per unit weight. The
// base is sized like the interior -log density just inside a bound so the
// objective has no large jump at the crossing; the quadratic term supplies
// the repelling slope line searches need.
constexpr double kPenaltyBase = 50.0;
constexpr double kPenaltyQuad = 1e4;

// d/dkappa of softplus_inverse(-1/kappa), kappa < 0.
double support_offset_dkappa(double kappa) {
  double y = -1.0 / kappa;
  return 1.0 / ((1.0 - std::exp(-y)) * kappa * kappa);
}

}  // namespace

ObsDesign ObsDesign::build(const ObservationSeries& data, const PeriodicSplineBasis& basis,
                           std::span<const double> weights) {
  check_covariate_coverage(data);
  if (!weights.empty() && weights.size() != data.size())
    throw std::invalid_argument("ObsDesign: weight vector size mismatch");
  const std::size_t m = data.size();
  const int n = basis.n_basis();
  ObsDesign d;
  d.n_basis = n;
  d.x = data.values;
  if (weights.empty())
    d.weight.assign(m, 1.0);
  else
    d.weight.assign(weights.begin(), weights.end());
  d.spline.resize(m * static_cast<std::size_t>(n));
  d.C.resize(m);
  d.cosd.resize(m);
  d.sind.resize(m);
  d.day.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double day = day_of_year(data.dates[i], data.first_obs);
    d.day[i] = day;
    basis.evaluate_into(day, &d.spline[i * n]);
    d.C[i] = data.covariate.at(data.dates[i].year);
    auto [c, s] = harmonic_pair(day);
    d.cosd[i] = c;
    d.sind[i] = s;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Packing

namespace {

void write_loc(std::vector<double>& v, std::size_t at, const LocationCoeffs& c,
               std::size_t n) {
  v[at] = c.intercept;
  std::copy(c.spline.begin(), c.spline.end(), v.begin() + at + 1);
  v[at + n + 1] = c.trend;
  v[at + n + 2] = c.trend_cos;
  v[at + n + 3] = c.trend_sin;
}

void read_loc(std::span<const double> v, std::size_t at, LocationCoeffs& c, std::size_t n) {
  c.intercept = v[at];
  c.spline.assign(v.begin() + at + 1, v.begin() + at + 1 + n);
  c.trend = v[at + n + 1];
  c.trend_cos = v[at + n + 2];
  c.trend_sin = v[at + n + 3];
}

void write_scale(std::vector<double>& v, std::size_t at, const LogScaleCoeffs& c) {
  v[at] = c.intercept;
  std::copy(c.spline.begin(), c.spline.end(), v.begin() + at + 1);
}

void read_scale(std::span<const double> v, std::size_t at, LogScaleCoeffs& c,
                std::size_t n) {
  c.intercept = v[at];
  c.spline.assign(v.begin() + at + 1, v.begin() + at + 1 + n);
}

}  // namespace

std::vector<double> pack_bats(const SeasonalBatsModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  std::vector<double> v(4 * n + 13);
  write_loc(v, 0, m.loc_lower, n);
  write_loc(v, n + 4, m.loc_upper, n);
  write_scale(v, 2 * (n + 4), m.scale_lower);
  write_scale(v, 2 * (n + 4) + (n + 1), m.scale_upper);
  v[4 * n + 10] = m.kappa0;
  v[4 * n + 11] = m.kappa1;
  v[4 * n + 12] = m.log_nu;
  return v;
}

void unpack_bats(std::span<const double> v, SeasonalBatsModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  if (v.size() != 4 * n + 13)
    throw std::invalid_argument("bats coefficient vector has wrong length");
  read_loc(v, 0, m.loc_lower, n);
  read_loc(v, n + 4, m.loc_upper, n);
  read_scale(v, 2 * (n + 4), m.scale_lower, n);
  read_scale(v, 2 * (n + 4) + (n + 1), m.scale_upper, n);
  m.kappa0 = v[4 * n + 10];
  m.kappa1 = v[4 * n + 11];
  m.log_nu = v[4 * n + 12];
}

std::vector<double> pack_skew(const SeasonalSkewNormalModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  std::vector<double> v(3 * n + 6);
  write_loc(v, 0, m.loc, n);
  write_scale(v, n + 4, m.log_scale);
  write_scale(v, 2 * n + 5, m.skew);
  return v;
}

void unpack_skew(std::span<const double> v, SeasonalSkewNormalModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  if (v.size() != 3 * n + 6)
    throw std::invalid_argument("skew-normal coefficient vector has wrong length");
  read_loc(v, 0, m.loc, n);
  read_scale(v, n + 4, m.log_scale, n);
  read_scale(v, 2 * n + 5, m.skew, n);
}

std::vector<double> pack_gpd(const SeasonalGpdModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  std::vector<double> v(n + 5);
  write_loc(v, 0, m.log_scale, n);
  v[n + 4] = m.xi;
  return v;
}

void unpack_gpd(std::span<const double> v, SeasonalGpdModel& m) {
  const std::size_t n = static_cast<std::size_t>(m.basis.n_basis());
  if (v.size() != n + 5)
    throw std::invalid_argument("gpd coefficient vector has wrong length");
  read_loc(v, 0, m.log_scale, n);
  m.xi = v[n + 4];
}

// ---------------------------------------------------------------------------
// Bulk-and-tails likelihood

BatsLikelihood::BatsLikelihood(ObsDesign design, OnViolation mode)
    : design_(std::move(design)), mode_(mode) {}

double BatsLikelihood::eval(std::span<const double> natural, std::vector<double>* grad,
                            std::size_t* n_violations) const {
  return eval_impl(natural, grad, n_violations, nullptr);
}

std::vector<double> BatsLikelihood::fisher_diag(std::span<const double> natural) const {
  std::vector<double> fisher;
  std::vector<double> grad;
  eval_impl(natural, &grad, nullptr, &fisher);
  return fisher;
}

double BatsLikelihood::eval_impl(std::span<const double> natural, std::vector<double>* grad,
                                 std::size_t* n_violations,
                                 std::vector<double>* fisher) const {
  const int n = design_.n_basis;
  const std::size_t np = n_params();
  if (natural.size() != np)
    throw std::invalid_argument("bats coefficient vector has wrong length");
  if (grad) grad->assign(np, 0.0);
  if (fisher) fisher->assign(np, 0.0);
  if (n_violations) *n_violations = 0;

  const std::size_t loc1_at = static_cast<std::size_t>(n) + 4;
  const std::size_t sc0_at = 2 * loc1_at;
  const std::size_t sc1_at = sc0_at + n + 1;
  const std::size_t k0_at = 4 * static_cast<std::size_t>(n) + 10;

  const double* loc0 = natural.data();
  const double* loc1 = natural.data() + loc1_at;
  const double* sc0 = natural.data() + sc0_at;
  const double* sc1 = natural.data() + sc1_at;
  const double kappa0 = natural[k0_at];
  const double kappa1 = natural[k0_at + 1];
  const double log_nu = natural[k0_at + 2];

  if (std::fabs(log_nu) > 300.0) return kInf;
  const double nu = std::exp(log_nu);

  double total = 0.0;
  const std::size_t m = design_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double wgt = design_.weight[i];
    if (wgt == 0.0) continue;
    const double* S = &design_.spline[i * n];
    const double C = design_.C[i];
    const double cd = design_.cosd[i], sd = design_.sind[i];

    auto loc_dot = [&](const double* c) {
      double r = c[0];
      for (int j = 0; j < n; ++j) r += c[1 + j] * S[j];
      return r + C * (c[n + 1] + c[n + 2] * cd + c[n + 3] * sd);
    };
    auto scale_dot = [&](const double* c) {
      double r = c[0];
      for (int j = 0; j < n; ++j) r += c[1 + j] * S[j];
      return r;
    };

    BatsParams p;
    p.nu = nu;
    p.phi0 = loc_dot(loc0);
    p.phi1 = loc_dot(loc1);
    const double lt0 = scale_dot(sc0), lt1 = scale_dot(sc1);
    if (std::fabs(lt0) > 300.0 || std::fabs(lt1) > 300.0) return kInf;
    p.tau0 = std::exp(lt0);
    p.tau1 = std::exp(lt1);
    p.kappa0 = kappa0;
    p.kappa1 = kappa1;

    const double x = design_.x[i];
    detail::PdfParts parts;
    const bool inside = detail::eval_pdf_parts(p, x, parts);

    // Contributions to the negative log likelihood w.r.t. the instantaneous
    // parameters (log-tau and log-nu directly).
    double gphi0 = 0, gphi1 = 0, glt0 = 0, glt1 = 0, gk0 = 0, gk1 = 0, glnu = 0;

    if (!inside) {
      if (n_violations) ++(*n_violations);
      if (mode_ == OnViolation::infinite) return kInf;
      if (parts.t1.violated) {
        const double P = softplus_inverse(-1.0 / p.kappa1);
        const double upper = p.phi1 + p.tau1 * P;
        const double delta = x - upper;
        total += wgt * (kPenaltyBase + kPenaltyQuad * delta * delta);
        if (grad) {
          const double dd = 2.0 * kPenaltyQuad * delta * wgt;
          gphi1 = -dd;
          glt1 = -dd * P * p.tau1;
          gk1 = -dd * p.tau1 * support_offset_dkappa(p.kappa1);
        }
      } else {
        const double P = softplus_inverse(-1.0 / p.kappa0);
        const double lower = p.phi0 - p.tau0 * P;
        const double delta = lower - x;
        total += wgt * (kPenaltyBase + kPenaltyQuad * delta * delta);
        if (grad) {
          const double dd = 2.0 * kPenaltyQuad * delta * wgt;
          gphi0 = dd;
          glt0 = -dd * P * p.tau0;
          gk0 = -dd * p.tau0 * support_offset_dkappa(p.kappa0);
        }
      }
    } else {
      total -= wgt * parts.logpdf;
      if (grad) {
        double log_nu_z2;  // log(nu + z^2), overflow-guarded
        if (parts.log_abs_z > 175.0)
          log_nu_z2 = 2.0 * parts.log_abs_z;
        else
          log_nu_z2 = std::log(nu + parts.z * parts.z);
        // (d log t / d z) * Y for positive Y given log Y.
        auto ltz_times = [&](double logY) {
          return -parts.sign_z * (nu + 1.0) *
                 std::exp(parts.log_abs_z + logY - log_nu_z2);
        };
        const auto& t1 = parts.t1;
        const auto& t0 = parts.t0;
        const double Ltz1 = ltz_times(parts.logD1);
        const double Ltz0 = ltz_times(parts.logD0);
        const double r1 = std::exp(parts.logD1 - parts.log_hprime);
        const double r0 = std::exp(parts.logD0 - parts.log_hprime);
        const double E1 = (1.0 - p.kappa1) * t1.sig / t1.w + (1.0 - t1.sig);
        const double E0 = (1.0 - p.kappa0) * t0.sig / t0.w + (1.0 - t0.sig);

        const double dphi1 = -Ltz1 - r1 * E1 / p.tau1;
        const double dphi0 = -Ltz0 + r0 * E0 / p.tau0;
        const double dlt1 = -t1.u * p.tau1 * Ltz1 - r1 * (1.0 + E1 * t1.u);
        const double dlt0 = t0.u * p.tau0 * Ltz0 - r0 * (1.0 + E0 * t0.u);
        const double dk1 = ltz_times(t1.logG) * t1.B + r1 * (t1.B - t1.s / t1.w);
        const double dk0 = -ltz_times(t0.logG) * t0.B + r0 * (t0.B - t0.s / t0.w);
        const double dlnu = student_t_log_pdf_dnu(nu, parts.z) * nu;

        gphi0 = -wgt * dphi0;
        gphi1 = -wgt * dphi1;
        glt0 = -wgt * dlt0;
        glt1 = -wgt * dlt1;
        gk0 = -wgt * dk0;
        gk1 = -wgt * dk1;
        glnu = -wgt * dlnu;
      }
    }

    if (grad) {
      std::vector<double>& g = *grad;
      auto add_loc = [&](std::size_t at, double gv) {
        g[at] += gv;
        for (int j = 0; j < n; ++j) g[at + 1 + j] += gv * S[j];
        g[at + n + 1] += gv * C;
        g[at + n + 2] += gv * C * cd;
        g[at + n + 3] += gv * C * sd;
      };
      auto add_scale = [&](std::size_t at, double gv) {
        g[at] += gv;
        for (int j = 0; j < n; ++j) g[at + 1 + j] += gv * S[j];
      };
      if (gphi0 != 0.0) add_loc(0, gphi0);
      if (gphi1 != 0.0) add_loc(loc1_at, gphi1);
      if (glt0 != 0.0) add_scale(sc0_at, glt0);
      if (glt1 != 0.0) add_scale(sc1_at, glt1);
      g[k0_at] += gk0;
      g[k0_at + 1] += gk1;
      g[k0_at + 2] += glnu;
      if (fisher) {
        std::vector<double>& fi = *fisher;
        auto add_loc_sq = [&](std::size_t at, double gv) {
          double g2 = gv * gv;
          fi[at] += g2;
          for (int j = 0; j < n; ++j) fi[at + 1 + j] += g2 * S[j] * S[j];
          fi[at + n + 1] += g2 * C * C;
          fi[at + n + 2] += g2 * C * C * cd * cd;
          fi[at + n + 3] += g2 * C * C * sd * sd;
        };
        auto add_scale_sq = [&](std::size_t at, double gv) {
          double g2 = gv * gv;
          fi[at] += g2;
          for (int j = 0; j < n; ++j) fi[at + 1 + j] += g2 * S[j] * S[j];
        };
        add_loc_sq(0, gphi0);
        add_loc_sq(loc1_at, gphi1);
        add_scale_sq(sc0_at, glt0);
        add_scale_sq(sc1_at, glt1);
        fi[k0_at] += gk0 * gk0;
        fi[k0_at + 1] += gk1 * gk1;
        fi[k0_at + 2] += glnu * glnu;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Skew-normal likelihood

SkewNormalLikelihood::SkewNormalLikelihood(ObsDesign design)
    : design_(std::move(design)) {}

double SkewNormalLikelihood::eval(std::span<const double> natural,
                                  std::vector<double>* grad) const {
  return eval_impl(natural, grad, nullptr);
}

std::vector<double> SkewNormalLikelihood::fisher_diag(std::span<const double> natural) const {
  std::vector<double> fisher;
  std::vector<double> grad;
  eval_impl(natural, &grad, &fisher);
  return fisher;
}

double SkewNormalLikelihood::eval_impl(std::span<const double> natural,
                                       std::vector<double>* grad,
                                       std::vector<double>* fisher) const {
  const int n = design_.n_basis;
  const std::size_t np = n_params();
  if (natural.size() != np)
    throw std::invalid_argument("skew-normal coefficient vector has wrong length");
  if (grad) grad->assign(np, 0.0);
  if (fisher) fisher->assign(np, 0.0);

  const std::size_t ls_at = static_cast<std::size_t>(n) + 4;
  const std::size_t sk_at = 2 * static_cast<std::size_t>(n) + 5;
  const double* loc = natural.data();
  const double* ls = natural.data() + ls_at;
  const double* sk = natural.data() + sk_at;

  constexpr double kHalfLog2Pi = 0.9189385332046727417803297;
  double total = 0.0;
  const std::size_t m = design_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double wgt = design_.weight[i];
    if (wgt == 0.0) continue;
    const double* S = &design_.spline[i * n];
    const double C = design_.C[i];
    const double cd = design_.cosd[i], sd = design_.sind[i];

    double mu = loc[0];
    double lsig = ls[0];
    double alpha = sk[0];
    for (int j = 0; j < n; ++j) {
      mu += loc[1 + j] * S[j];
      lsig += ls[1 + j] * S[j];
      alpha += sk[1 + j] * S[j];
    }
    mu += C * (loc[n + 1] + loc[n + 2] * cd + loc[n + 3] * sd);
    if (std::fabs(lsig) > 300.0) return kInf;
    const double sigma = std::exp(lsig);

    const double t = (design_.x[i] - mu) / sigma;
    const double at = alpha * t;
    const double lp = 0.6931471805599453094 - lsig - 0.5 * t * t - kHalfLog2Pi +
                      log_normal_cdf(at);
    total -= wgt * lp;

    if (grad) {
      const double mills = inverse_mills(at);
      const double dmu = (t - alpha * mills) / sigma;
      const double dls = -1.0 + t * t - alpha * mills * t;  // w.r.t. log sigma
      const double dal = mills * t;
      const double gmu = -wgt * dmu, gls = -wgt * dls, gal = -wgt * dal;
      std::vector<double>& g = *grad;
      g[0] += gmu;
      for (int j = 0; j < n; ++j) g[1 + j] += gmu * S[j];
      g[n + 1] += gmu * C;
      g[n + 2] += gmu * C * cd;
      g[n + 3] += gmu * C * sd;
      g[ls_at] += gls;
      for (int j = 0; j < n; ++j) g[ls_at + 1 + j] += gls * S[j];
      g[sk_at] += gal;
      for (int j = 0; j < n; ++j) g[sk_at + 1 + j] += gal * S[j];
      if (fisher) {
        std::vector<double>& fi = *fisher;
        double m2 = gmu * gmu, l2 = gls * gls, a2 = gal * gal;
        fi[0] += m2;
        for (int j = 0; j < n; ++j) fi[1 + j] += m2 * S[j] * S[j];
        fi[n + 1] += m2 * C * C;
        fi[n + 2] += m2 * C * C * cd * cd;
        fi[n + 3] += m2 * C * C * sd * sd;
        fi[ls_at] += l2;
        for (int j = 0; j < n; ++j) fi[ls_at + 1 + j] += l2 * S[j] * S[j];
        fi[sk_at] += a2;
        for (int j = 0; j < n; ++j) fi[sk_at + 1 + j] += a2 * S[j] * S[j];
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// GPD likelihood over excesses

GpdLikelihood::GpdLikelihood(ObsDesign excess_design, BatsLikelihood::OnViolation mode)
    : design_(std::move(excess_design)), mode_(mode) {}

double GpdLikelihood::eval(std::span<const double> natural, std::vector<double>* grad,
                           std::size_t* n_violations) const {
  return eval_impl(natural, grad, n_violations, nullptr);
}

std::vector<double> GpdLikelihood::fisher_diag(std::span<const double> natural) const {
  std::vector<double> fisher;
  std::vector<double> grad;
  eval_impl(natural, &grad, nullptr, &fisher);
  return fisher;
}

double GpdLikelihood::eval_impl(std::span<const double> natural, std::vector<double>* grad,
                                std::size_t* n_violations,
                                std::vector<double>* fisher) const {
  const int n = design_.n_basis;
  const std::size_t np = n_params();
  if (natural.size() != np)
    throw std::invalid_argument("gpd coefficient vector has wrong length");
  if (grad) grad->assign(np, 0.0);
  if (fisher) fisher->assign(np, 0.0);
  if (n_violations) *n_violations = 0;

  const double* ls = natural.data();
  const double xi = natural[np - 1];

  double total = 0.0;
  const std::size_t m = design_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double wgt = design_.weight[i];
    if (wgt == 0.0) continue;
    const double* S = &design_.spline[i * n];
    const double C = design_.C[i];
    const double cd = design_.cosd[i], sd = design_.sind[i];

    double lsig = ls[0];
    for (int j = 0; j < n; ++j) lsig += ls[1 + j] * S[j];
    lsig += C * (ls[n + 1] + ls[n + 2] * cd + ls[n + 3] * sd);
    if (std::fabs(lsig) > 300.0) return kInf;
    const double sigma = std::exp(lsig);

    const double e = design_.x[i];  // excess, > 0 by construction
    const double r = e / sigma;
    const double v = 1.0 + xi * r;

    double gls = 0, gxi = 0;
    if (v <= 0.0) {
      if (n_violations) ++(*n_violations);
      if (mode_ == BatsLikelihood::OnViolation::infinite) return kInf;
      const double delta = e + sigma / xi;  // distance past the upper endpoint
      total += wgt * (kPenaltyBase + kPenaltyQuad * delta * delta);
      if (grad) {
        const double dd = 2.0 * kPenaltyQuad * delta * wgt;
        gls = dd * sigma / xi;
        gxi = -dd * sigma / (xi * xi);
      }
    } else {
      double lp, dxi;
      if (std::fabs(xi) < 1e-8) {
        lp = -lsig - r - xi * (r - 0.5 * r * r);
        dxi = -(r - 0.5 * r * r) - 2.0 * xi * (r * r * r / 3.0 - 0.5 * r * r);
      } else {
        const double q = std::log1p(xi * r) / xi;
        lp = -lsig - (1.0 + xi) * q;  // == -lsig - (1 + 1/xi) log1p(xi r)
        const double t = r / v;
        dxi = (q - t) / xi - t;
      }
      total -= wgt * lp;
      if (grad) {
        const double dls = -1.0 + (1.0 + xi) * r / v;  // w.r.t. log sigma
        gls = -wgt * dls;
        gxi = -wgt * dxi;
      }
    }

    if (grad) {
      std::vector<double>& g = *grad;
      g[0] += gls;
      for (int j = 0; j < n; ++j) g[1 + j] += gls * S[j];
      g[n + 1] += gls * C;
      g[n + 2] += gls * C * cd;
      g[n + 3] += gls * C * sd;
      g[np - 1] += gxi;
      if (fisher) {
        std::vector<double>& fi = *fisher;
        double l2 = gls * gls;
        fi[0] += l2;
        for (int j = 0; j < n; ++j) fi[1 + j] += l2 * S[j] * S[j];
        fi[n + 1] += l2 * C * C;
        fi[n + 2] += l2 * C * C * cd * cd;
        fi[n + 3] += l2 * C * C * sd * sd;
        fi[np - 1] += gxi * gxi;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Public entry points

double bats_negloglik(const SeasonalBatsModel& m, const ObservationSeries& data) {
  BatsLikelihood lik(ObsDesign::build(data, m.basis), BatsLikelihood::OnViolation::infinite);
  return lik.eval(pack_bats(m), nullptr);
}

std::vector<double> negloglik_gradient(const SeasonalBatsModel& m,
                                       const ObservationSeries& data) {
  BatsParams probe;
  probe.nu = std::exp(m.log_nu);
  probe.kappa0 = m.kappa0;
  probe.kappa1 = m.kappa1;
  if (!probe.shape_constraint_ok(0.0))
    throw std::domain_error(
        "negloglik_gradient: parameters on or beyond the shape constraint boundary");
  BatsLikelihood lik(ObsDesign::build(data, m.basis), BatsLikelihood::OnViolation::infinite);
  std::vector<double> grad;
  std::size_t violations = 0;
  double f = lik.eval(pack_bats(m), &grad, &violations);
  if (!std::isfinite(f) || violations > 0)
    throw std::domain_error(
        "negloglik_gradient: an observation lies outside its instantaneous support");
  return grad;
}

double skew_negloglik(const SeasonalSkewNormalModel& m, const ObservationSeries& data) {
  SkewNormalLikelihood lik(ObsDesign::build(data, m.basis));
  return lik.eval(pack_skew(m), nullptr);
}

}  // namespace bats
