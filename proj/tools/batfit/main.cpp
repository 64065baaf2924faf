// batfit: fit and query seasonal temperature distribution models from
// daily station records. Subcommands cover fitting, quantile curves,
// densities, cross-validated scoring, quantile changes with bootstrap
// intervals, spread series, and simulation.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bats/bootstrap.hpp"
#include "bats/errors.hpp"
#include "bats/fit.hpp"
#include "bats/ingest.hpp"
#include "bats/kde.hpp"
#include "bats/likelihood.hpp"
#include "bats/model_io.hpp"
#include "bats/quantile_regression.hpp"
#include "bats/scoring.hpp"
#include "bats/seasonal_model.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kFormatVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for labels (quantile levels and the like).
std::string fmt_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Metadata header block written as comment lines at the top of every
// output file.
class Meta {
 public:
  Meta(const std::string& command, const std::string& config_blob) {
    add("tool", std::string("batfit ") + kToolVersion);
    add("format_version", std::to_string(kFormatVersion));
    add("command", command);
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, fnv1a(config_blob));
    add("config_hash", hex);
  }
  void add(const std::string& key, const std::string& value) {
    kv_.emplace_back(key, value);
  }
  void write(std::ostream& out) const {
    for (const auto& [k, v] : kv_) out << "# " << k << "=" << v << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> kv_;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared input loading

struct DataArgs {
  std::string data_path;
  std::string covariate_path;
  std::string covariate_aux_path;
  int min_hours = 20;
  bool fahrenheit = false;
};

void add_data_flags(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.data_path,
                  "daily observations CSV (station,date,temp[,hours])")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--covariate", args.covariate_path, "yearly covariate CSV (year,value)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--covariate-aux", args.covariate_aux_path,
                  "auxiliary yearly CSV used to extend the covariate by regression")
      ->check(CLI::ExistingFile);
  cmd->add_option("--min-hours", args.min_hours, "drop rows reporting fewer hours");
  cmd->add_flag("--fahrenheit", args.fahrenheit, "input temperatures are deg F");
}

bats::ObservationSeries load_series(const DataArgs& args, bats::IngestReport* report) {
  bats::YearlyCovariate primary = bats::read_covariate_csv(args.covariate_path);
  bats::ObservationSeries series =
      bats::ingest(args.data_path, primary, args.min_hours, args.fahrenheit, report);
  if (!args.covariate_aux_path.empty()) {
    bats::YearlyCovariate aux = bats::read_covariate_csv(args.covariate_aux_path);
    series.covariate = bats::extend_covariate(primary, aux, series.observation_years());
  }
  return series;
}

struct FitFlags {
  std::size_t max_iter = 500;
  double grad_tol = 1e-6;
  std::string scale_grid = "-1,0,1,2";
  double margin = 1e-3;
  std::uint64_t seed = 0;
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--max-iter", flags.max_iter, "optimizer iteration budget");
  cmd->add_option("--grad-tol", flags.grad_tol, "relative gradient tolerance");
  cmd->add_option("--scale-grid", flags.scale_grid, "profiled log-scale intercepts");
  cmd->add_option("--margin", flags.margin, "shape constraint margin");
  cmd->add_option("--seed", flags.seed, "random seed");
}

bats::FitConfig make_config(const FitFlags& flags) {
  bats::FitConfig config;
  config.max_iterations = flags.max_iter;
  config.gradient_tolerance = flags.grad_tol;
  config.scale_intercept_grid = parse_list(flags.scale_grid);
  config.constraint_margin = flags.margin;
  config.rng_seed = flags.seed;
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const DataArgs& data_args, const FitFlags& fit_flags,
            const std::string& model_name, double p_mu, const std::string& out_path) {
  bats::IngestReport report;
  bats::ObservationSeries series = load_series(data_args, &report);
  bats::FitConfig config = make_config(fit_flags);

  bats::ModelDocument doc;
  if (model_name == "bats") {
    bats::BatsFitResult fit = bats::fit_bats(series, config);
    doc.kind = bats::ModelDocument::Kind::bats;
    doc.bats = fit.model;
    doc.diagnostics = fit.diag;
  } else if (model_name == "skew") {
    bats::SkewFitResult fit = bats::fit_skew_normal(series, config);
    doc.kind = bats::ModelDocument::Kind::skew_normal;
    doc.skew = fit.model;
    doc.diagnostics = fit.diag;
  } else if (model_name == "gpd-upper" || model_name == "gpd-lower") {
    bats::Tail tail = model_name == "gpd-upper" ? bats::Tail::upper : bats::Tail::lower;
    bats::GpdFitResult fit = bats::fit_gpd(series, tail, p_mu, config);
    doc.kind = bats::ModelDocument::Kind::gpd;
    doc.gpd = fit.model;
    doc.diagnostics = fit.diag;
  } else {
    throw bats::config_error("unknown model '" + model_name +
                             "' (expected bats, skew, gpd-upper, gpd-lower)");
  }
  bats::save_model(doc, out_path);

  std::cout << "station " << series.station_id << ": " << series.size()
            << " observations (dropped " << report.dropped_sanity << " sanity, "
            << report.dropped_hours << " hours, " << report.dropped_duplicate
            << " duplicate)\n"
            << model_name << " fit: neg_loglik=" << fmt(doc.diagnostics.neg_loglik)
            << " converged=" << (doc.diagnostics.converged ? "yes" : "no")
            << " iterations=" << doc.diagnostics.iterations << "\n"
            << "model written to " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// quantiles

int cmd_quantiles(const std::string& model_path, int year, const std::string& q_list,
                  const std::string& out_path, const std::string& blob) {
  bats::ModelDocument doc = bats::load_model(model_path);
  if (doc.kind != bats::ModelDocument::Kind::bats)
    throw bats::config_error("quantiles requires a bats model");
  const bats::SeasonalBatsModel& model = *doc.bats;
  std::vector<double> qs = parse_list(q_list);
  if (qs.empty()) throw bats::config_error("no quantiles given");
  for (double q : qs)
    if (!(q > 0.0 && q < 1.0)) throw bats::config_error("quantiles must be in (0,1)");

  std::vector<std::vector<double>> curves;
  for (double q : qs) curves.push_back(bats::quantile_curve(model, q, year));

  Meta meta("quantiles", blob);
  meta.add("station", model.station_id);
  meta.add("first_obs", model.first_obs.to_string());
  meta.add("year", std::to_string(year));
  meta.add("day_grid", "day d is (first_obs + d) mod 365.25; d = 0..364");
  std::ofstream out = open_out(out_path);
  meta.write(out);
  out << "day";
  for (double q : qs) out << ",q" << q;
  out << "\n";
  for (int d = 0; d < bats::kDayGrid; ++d) {
    out << d;
    for (std::size_t k = 0; k < qs.size(); ++k) out << "," << fmt(curves[k][d]);
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// density

int cmd_density(const std::vector<std::string>& model_paths, const DataArgs& data_args,
                const std::string& dates_list, double tmin, double tmax, double tstep,
                int half_window, const std::string& out_path, const std::string& blob) {
  bats::ObservationSeries series = load_series(data_args, nullptr);
  std::vector<bats::Date> dates;
  for (const std::string& d : parse_names(dates_list)) dates.push_back(bats::Date::parse(d));
  if (dates.empty()) throw bats::config_error("no dates given");

  if (!(tstep > 0.0)) throw bats::config_error("tstep must be > 0");
  if (tmin >= tmax) {
    tmin = *std::min_element(series.values.begin(), series.values.end()) - 5.0;
    tmax = *std::max_element(series.values.begin(), series.values.end()) + 5.0;
  }
  std::vector<double> grid;
  for (double t = tmin; t <= tmax + 1e-9; t += tstep) grid.push_back(t);

  struct Column {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Column> columns;

  for (const std::string& path : model_paths) {
    bats::ModelDocument doc = bats::load_model(path);
    for (const bats::Date& date : dates) {
      Column col;
      col.values.reserve(grid.size());
      if (doc.kind == bats::ModelDocument::Kind::bats) {
        const auto& m = *doc.bats;
        bats::BatsParams p = bats::params_at(m, bats::day_index(date, m.first_obs));
        col.name = "bats_" + date.to_string();
        for (double t : grid) col.values.push_back(bats::bats_pdf(p, t));
      } else if (doc.kind == bats::ModelDocument::Kind::skew_normal) {
        const auto& m = *doc.skew;
        bats::SkewNormalParams p =
            bats::skew_params_at(m, bats::day_index(date, m.first_obs));
        col.name = "skew_" + date.to_string();
        for (double t : grid) col.values.push_back(bats::skew_normal_pdf(p, t));
      } else {
        throw bats::config_error("density requires bats or skew models");
      }
      columns.push_back(std::move(col));
    }
  }

  Meta meta("density", blob);
  meta.add("station", series.station_id);
  meta.add("kde_half_window_days", std::to_string(half_window));
  for (const bats::Date& date : dates) {
    double day = bats::day_of_year(date, series.first_obs);
    bats::KdeResult kde = bats::windowed_kde(series, day, half_window, grid);
    Column col;
    col.name = "kde_" + date.to_string();
    col.values = std::move(kde.density);
    columns.push_back(std::move(col));
    meta.add("kde_bandwidth_" + date.to_string(), fmt(kde.bandwidth));
    meta.add("kde_bandwidth_rule_" + date.to_string(), kde.bandwidth_rule);
    meta.add("kde_pool_" + date.to_string(), std::to_string(kde.n_pooled));
  }

  std::ofstream out = open_out(out_path);
  meta.write(out);
  out << "temp";
  for (const Column& col : columns) out << "," << col.name;
  out << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << fmt(grid[i]);
    for (const Column& col : columns) out << "," << fmt(col.values[i]);
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// score

int cmd_score(const DataArgs& data_args, const FitFlags& fit_flags,
              const std::string& kind, const std::string& models_list,
              const std::string& tail_name, const std::string& pq_list, double p_mu,
              const std::string& outdir, const std::string& blob) {
  bats::ObservationSeries series = load_series(data_args, nullptr);
  bats::FitConfig config = make_config(fit_flags);
  bats::CvFolds folds = bats::make_cv_folds(series.observation_years());
  std::filesystem::create_directories(outdir);

  auto write_report = [&](const std::string& path,
                          const std::vector<std::string>& model_names,
                          const std::vector<std::vector<bats::ScoredObs>>& scores,
                          bool by_season) {
    std::ofstream out = open_out(path);
    Meta meta("score", blob);
    meta.add("station", series.station_id);
    meta.add("folds", std::to_string(folds.n_folds));
    meta.write(out);
    out << "row,fold,model,mean_score,n_obs\n";
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      std::map<std::pair<std::string, int>, std::pair<double, std::size_t>> cells;
      for (const bats::ScoredObs& so : scores[m]) {
        std::vector<std::string> rows = {"Year"};
        if (by_season) rows.push_back(bats::season_name(bats::season_of(so.date)));
        for (const std::string& row : rows) {
          auto& cell = cells[{row, so.fold}];
          cell.first += so.score;
          cell.second += 1;
        }
      }
      for (const auto& [key, cell] : cells)
        out << key.first << "," << key.second << "," << model_names[m] << ","
            << fmt(cell.first / cell.second) << "," << cell.second << "\n";
    }
  };

  if (kind == "crps") {
    std::vector<std::string> names = parse_names(models_list);
    if (names.size() != 2) throw bats::config_error("--models needs exactly two entries");
    for (const std::string& n : names)
      if (n != "bats" && n != "skew")
        throw bats::config_error("crps models must be bats or skew");

    bats::MakeScorers make = [&](const bats::ObservationSeries& train,
                                 const std::vector<int>&, int) {
      // Fit each distinct model once per fold.
      std::map<std::string, bats::ScoreFn> fitted;
      for (const std::string& n : names) {
        if (fitted.count(n)) continue;
        if (n == "bats") {
          bats::SeasonalBatsModel model = bats::fit_bats(train, config).model;
          fitted[n] = [model](const bats::Date& date, double x) {
            bats::BatsParams p =
                bats::params_at(model, bats::day_index(date, model.first_obs));
            double lo = bats::bats_quantile(p, 1e-8);
            double hi = bats::bats_quantile(p, 1.0 - 1e-8);
            return bats::crps([&p](double y) { return bats::bats_cdf(p, y); }, x, lo, hi);
          };
        } else {
          bats::SeasonalSkewNormalModel model = bats::fit_skew_normal(train, config).model;
          fitted[n] = [model](const bats::Date& date, double x) {
            bats::SkewNormalParams p =
                bats::skew_params_at(model, bats::day_index(date, model.first_obs));
            double lo = p.mu - 9.0 * p.sigma, hi = p.mu + 9.0 * p.sigma;
            return bats::crps([&p](double y) { return bats::skew_normal_cdf(p, y); }, x,
                              lo, hi);
          };
        }
      }
      std::vector<bats::ScoreFn> out;
      for (const std::string& n : names) out.push_back(fitted[n]);
      return out;
    };
    bats::CvScores scores = bats::run_cross_validation(series, folds, make);

    write_report(outdir + "/crps_report.csv", names, scores.per_model, true);
    std::vector<bats::ComparisonRow> rows =
        bats::crps_comparison(scores.per_model[0], scores.per_model[1]);
    std::ofstream out = open_out(outdir + "/crps_summary.csv");
    Meta meta("score", blob);
    meta.add("comparison", names[0] + "_vs_" + names[1]);
    meta.add("formula", "100 * sum_k mean_k(" + names[0] + "-" + names[1] +
                            ") / sum_k mean_k(" + names[0] + ")");
    meta.write(out);
    out << "row,value,folds_used\n";
    for (const bats::ComparisonRow& row : rows) {
      out << row.label << "," << fmt(row.value) << "," << row.folds_used << "\n";
      for (int excluded : row.excluded_folds)
        std::cerr << "warning: row " << row.label << " excludes empty fold " << excluded
                  << "\n";
    }
    std::cout << "wrote " << outdir << "/crps_report.csv and crps_summary.csv\n";
    return 0;
  }

  if (kind != "wcrps") throw bats::config_error("--kind must be crps or wcrps");

  bats::Tail tail = tail_name == "lower" ? bats::Tail::lower : bats::Tail::upper;
  const double sign = tail == bats::Tail::upper ? 1.0 : -1.0;
  std::vector<double> pqs = parse_list(pq_list);
  if (pqs.empty()) throw bats::config_error("no --pq levels given");

  // Tail thresholds come from cross-validated quantile regressions on the
  // sign-adjusted data; all tail machinery runs in that orientation and
  // results are reported under the original labels.
  const int nb = 8;
  bats::PeriodicSplineBasis basis =
      bats::build_periodic_spline_basis(nb, bats::kDaysPerYear);

  struct FoldModels {
    bats::LogScaleCoeffs mu_curve;               // censoring threshold, sign space
    std::vector<bats::LogScaleCoeffs> q_curves;  // one per pq level
    bats::SeasonalBatsModel bats_model;
    bats::SeasonalSkewNormalModel skew_model;
    bats::SeasonalGpdModel gpd_model;
  };

  auto fit_quantile_curve = [&](const bats::ObservationSeries& train, double level) {
    Eigen::MatrixXd X(train.size(), nb);
    Eigen::VectorXd y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      double day = bats::day_of_year(train.dates[i], train.first_obs);
      std::vector<double> row = basis.evaluate(day);
      for (int j = 0; j < nb; ++j) X(i, j) = row[j];
      y[i] = sign * train.values[i];
    }
    Eigen::VectorXd beta = bats::quantile_regression(X, y, level);
    bats::LogScaleCoeffs curve;
    curve.intercept = 0.0;
    curve.spline.assign(beta.data(), beta.data() + nb);
    return curve;
  };

  auto per_fold = std::make_shared<std::map<int, FoldModels>>();
  bats::MakeScorers make = [&, per_fold](const bats::ObservationSeries& train,
                                         const std::vector<int>&, int fold) {
    FoldModels fm;
    fm.mu_curve = fit_quantile_curve(train, p_mu);
    for (double pq : pqs) fm.q_curves.push_back(fit_quantile_curve(train, pq));
    fm.bats_model = bats::fit_bats(train, config).model;
    fm.skew_model = bats::fit_skew_normal(train, config).model;
    fm.gpd_model = bats::fit_gpd(train, tail, p_mu, config).model;
    (*per_fold)[fold] = std::move(fm);

    // One scorer per (pq level, model) with models ordered bats, skew, gpd.
    std::vector<bats::ScoreFn> out;
    for (std::size_t k = 0; k < pqs.size(); ++k) {
      for (int which = 0; which < 3; ++which) {
        out.push_back([&, per_fold, fold, k, which](const bats::Date& date, double x) {
          const FoldModels& models = per_fold->at(fold);
          double day = bats::day_of_year(date, series.first_obs);
          double mu = bats::curve_at(models.mu_curve, basis, day);
          double q = bats::curve_at(models.q_curves[k], basis, day);
          if (q < mu) q = mu;  // tail region never extends below the censor point
          double z = sign * x;
          double x_cens = std::max(z, mu);

          bats::CensoredCdf cz;
          cz.mu = mu;
          cz.p_mu = p_mu;
          if (which == 0) {
            const auto& m = models.bats_model;
            bats::BatsParams p = bats::params_at(m, bats::day_index(date, m.first_obs));
            cz.kind = bats::CensoredCdf::Kind::full_model;
            cz.underlying = [p, sign](double yy) {
              return sign > 0 ? bats::bats_cdf(p, yy) : bats::bats_survival(p, -yy);
            };
            cz.hi_bound = sign > 0 ? bats::bats_quantile(p, 1.0 - 1e-8)
                                   : -bats::bats_quantile(p, 1e-8);
          } else if (which == 1) {
            const auto& m = models.skew_model;
            bats::SkewNormalParams p =
                bats::skew_params_at(m, bats::day_index(date, m.first_obs));
            cz.kind = bats::CensoredCdf::Kind::full_model;
            cz.underlying = [p, sign](double yy) {
              return sign > 0 ? bats::skew_normal_cdf(p, yy)
                              : 1.0 - bats::skew_normal_cdf(p, -yy);
            };
            cz.hi_bound = p.mu * sign + 9.0 * p.sigma;
          } else {
            const auto& m = models.gpd_model;
            bats::GpdParams p = bats::gpd_params_at(m, bats::day_index(date, m.first_obs));
            p.mu = mu;  // censor at the fold's threshold curve
            cz.kind = bats::CensoredCdf::Kind::gpd;
            cz.underlying = [p](double yy) { return bats::gpd_cdf(p, yy); };
            double ub = bats::gpd_upper_bound(p);
            cz.hi_bound = std::isfinite(ub) ? ub : mu + 20.0 * p.sigma;
          }
          return bats::wcrps(cz, x_cens, q);
        });
      }
    }
    return out;
  };
  bats::CvScores scores = bats::run_cross_validation(series, folds, make);

  std::vector<std::string> col_names;
  for (double pq : pqs)
    for (const char* m : {"bats", "skew", "gpd"})
      col_names.push_back(std::string(m) + "@pq" + fmt_label(pq));
  write_report(outdir + "/wcrps_report.csv", col_names, scores.per_model, false);

  std::ofstream out = open_out(outdir + "/wcrps_summary.csv");
  Meta meta("score", blob);
  meta.add("tail", tail_name);
  meta.add("p_mu", fmt(p_mu));
  meta.add("formula", "100 * sum_k mean_k(model - gpd) / sum_k mean_k(gpd)");
  meta.write(out);
  out << "row,comparison,value,folds_used\n";
  for (std::size_t k = 0; k < pqs.size(); ++k) {
    bats::ComparisonRow rb =
        bats::wcrps_comparison(scores.per_model[3 * k + 0], scores.per_model[3 * k + 2]);
    bats::ComparisonRow rs =
        bats::wcrps_comparison(scores.per_model[3 * k + 1], scores.per_model[3 * k + 2]);
    double row_label = tail == bats::Tail::upper ? pqs[k] : 1.0 - pqs[k];
    out << fmt_label(row_label) << ",bats_vs_gpd," << fmt(rb.value) << "," << rb.folds_used
        << "\n";
    out << fmt_label(row_label) << ",skew_vs_gpd," << fmt(rs.value) << "," << rs.folds_used
        << "\n";
  }
  std::cout << "wrote " << outdir << "/wcrps_report.csv and wcrps_summary.csv\n";
  return 0;
}

// ---------------------------------------------------------------------------
// change

int cmd_change(const std::string& model_path, int year0, int year1,
               const std::string& q_list, bool same_q, std::size_t bootstrap_n,
               const DataArgs& data_args, const FitFlags& fit_flags,
               const std::string& out_path, const std::string& blob) {
  bats::ModelDocument doc = bats::load_model(model_path);
  if (doc.kind != bats::ModelDocument::Kind::bats)
    throw bats::config_error("change requires a bats model");
  const bats::SeasonalBatsModel& model = *doc.bats;
  std::vector<double> qs = parse_list(q_list);
  if (qs.empty()) throw bats::config_error("no quantiles given");
  for (double q : qs)
    if (!(q > 0.0 && q < 1.0)) throw bats::config_error("quantiles must be in (0,1)");
  bats::ChangeBaseline baseline =
      same_q ? bats::ChangeBaseline::same_quantile : bats::ChangeBaseline::median_at_start;

  std::vector<std::vector<double>> curves;
  for (double q : qs)
    curves.push_back(bats::quantile_change(model, q, year0, year1, baseline));

  std::vector<bats::FunctionalCi> cis;
  if (bootstrap_n > 0) {
    if (data_args.data_path.empty() || data_args.covariate_path.empty())
      throw bats::config_error("--bootstrap needs --data and --covariate to refit");
    bats::ObservationSeries series = load_series(data_args, nullptr);
    bats::FitConfig config = make_config(fit_flags);

    bats::BootstrapPlan plan;
    plan.n_replicates = bootstrap_n;
    plan.rng_seed = fit_flags.seed;
    bats::RefitFn refit = [&](const bats::ObservationSeries& data,
                              std::span<const double> weights) {
      bats::BatsFitResult fit = bats::fit_bats(data, config, weights, &model);
      bats::ReplicateFit rep;
      rep.converged = fit.diag.converged;
      for (double q : qs) {
        std::vector<double> curve =
            bats::quantile_change(fit.model, q, year0, year1, baseline);
        rep.functionals.insert(rep.functionals.end(), curve.begin(), curve.end());
      }
      return rep;
    };
    bats::BootstrapResult boot = bats::bootstrap_fits(series, plan, refit);
    cis = bats::bootstrap_cis(boot, 0.95);

    // Raw replicate dump plus the interval summary alongside the curve file.
    {
      std::ofstream rout = open_out(out_path + ".replicates.csv");
      Meta meta("change", blob);
      meta.add("seed", std::to_string(plan.rng_seed));
      meta.add("n_replicates", std::to_string(plan.n_replicates));
      meta.write(rout);
      rout << "replicate,converged,functional_name,grid_index,value\n";
      for (std::size_t rep = 0; rep < boot.replicate_values.size(); ++rep)
        for (std::size_t j = 0; j < boot.replicate_values[rep].size(); ++j)
          rout << rep << "," << (boot.converged[rep] ? 1 : 0) << ",change_q"
               << fmt_label(qs[j / bats::kDayGrid]) << "," << j % bats::kDayGrid << ","
               << fmt(boot.replicate_values[rep][j]) << "\n";
    }
    {
      std::ofstream cout_ = open_out(out_path + ".ci.csv");
      Meta meta("change", blob);
      meta.add("level", "0.95");
      meta.add("n_failed", std::to_string(boot.n_failed));
      meta.add("percentile_rule", "linear interpolation between order statistics");
      meta.write(cout_);
      cout_ << "functional_name,grid_index,estimate,lo,hi\n";
      for (std::size_t j = 0; j < cis.size(); ++j)
        cout_ << "change_q" << fmt_label(qs[j / bats::kDayGrid]) << "," << j % bats::kDayGrid
              << "," << fmt(curves[j / bats::kDayGrid][j % bats::kDayGrid]) << ","
              << fmt(cis[j].lo) << "," << fmt(cis[j].hi) << "\n";
    }
  }

  Meta meta("change", blob);
  meta.add("station", model.station_id);
  meta.add("year0", std::to_string(year0));
  meta.add("year1", std::to_string(year1));
  meta.add("baseline", same_q ? "same quantile at year0" : "median at year0");
  std::ofstream out = open_out(out_path);
  meta.write(out);
  out << "day";
  for (double q : qs) {
    out << ",change_q" << q;
    if (!cis.empty()) out << ",lo_q" << q << ",hi_q" << q;
  }
  out << "\n";
  for (int d = 0; d < bats::kDayGrid; ++d) {
    out << d;
    for (std::size_t k = 0; k < qs.size(); ++k) {
      out << "," << fmt(curves[k][d]);
      if (!cis.empty()) {
        const bats::FunctionalCi& ci = cis[k * bats::kDayGrid + d];
        out << "," << fmt(ci.lo) << "," << fmt(ci.hi);
      }
    }
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spreads

int cmd_spreads(const std::string& model_path, int year0, int year1, int step,
                const std::string& out_path, const std::string& blob) {
  bats::ModelDocument doc = bats::load_model(model_path);
  if (doc.kind != bats::ModelDocument::Kind::bats)
    throw bats::config_error("spreads requires a bats model");
  if (step < 1) throw bats::config_error("--step must be >= 1");
  const bats::SeasonalBatsModel& model = *doc.bats;

  Meta meta("spreads", blob);
  meta.add("station", model.station_id);
  meta.add("averaging", "unweighted mean over the 365-day grid");
  std::ofstream out = open_out(out_path);
  meta.write(out);
  out << "year";
  for (const std::string& label : bats::spread_labels()) out << "," << label;
  out << "\n";
  for (int year = year0; year <= year1; year += step) {
    bats::QuantileSpreads qs = bats::quantile_spreads(model, year);
    out << year;
    for (double v : qs.annual_mean) out << "," << fmt(v);
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& model_path, int year0, int year1, std::uint64_t seed,
                 const std::string& out_path, const std::string& blob) {
  bats::ModelDocument doc = bats::load_model(model_path);
  if (doc.kind != bats::ModelDocument::Kind::bats)
    throw bats::config_error("simulate requires a bats model");
  const bats::SeasonalBatsModel& model = *doc.bats;

  bats::Rng rng(seed);
  Meta meta("simulate", blob);
  meta.add("station", model.station_id);
  meta.add("seed", std::to_string(seed));
  std::ofstream out = open_out(out_path);
  meta.write(out);
  out << "station,date,temp\n";
  bats::Date first{year0, 1, 1};
  bats::Date stop{year1 + 1, 1, 1};
  for (long s = first.serial(); s < stop.serial(); ++s) {
    bats::Date date = bats::Date::from_serial(s);
    bats::BatsParams p = bats::params_at(model, bats::day_index(date, model.first_obs));
    double x = bats::bats_quantile(p, rng.uniform_open01());
    out << model.station_id << "," << date.to_string() << "," << fmt(x) << "\n";
  }
  return 0;
}

void emit_error_json(const std::string& type, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seasonal temperature distribution modeling"};
  app.require_subcommand(1);
  // Options may come from an INI-style config file; explicit flags win.
  app.set_config("--config", "", "config file with long-option values");

  // Configuration fingerprint: every argument except the output paths, so
  // identical runs written to different files stay byte-identical.
  std::ostringstream blob_stream;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--out" || arg == "--outdir") {
      ++i;
      continue;
    }
    blob_stream << arg << '\x1f';
  }
  const std::string blob = blob_stream.str();

  // fit
  DataArgs fit_data;
  FitFlags fit_flags;
  std::string fit_model = "bats", fit_out;
  double fit_pmu = 0.95;
  CLI::App* fit = app.add_subcommand("fit", "fit a model to daily observations");
  add_data_flags(fit, fit_data);
  add_fit_flags(fit, fit_flags);
  fit->add_option("--model", fit_model, "bats | skew | gpd-upper | gpd-lower");
  fit->add_option("--pmu", fit_pmu, "threshold quantile level for gpd fits");
  fit->add_option("--out", fit_out, "output model JSON")->required();

  // quantiles
  std::string qn_model, qn_q = "0.5", qn_out;
  int qn_year = 2000;
  CLI::App* quantiles = app.add_subcommand("quantiles", "per-day quantile curves");
  quantiles->add_option("--model", qn_model)->required()->check(CLI::ExistingFile);
  quantiles->add_option("--year", qn_year)->required();
  quantiles->add_option("--q", qn_q, "comma-separated quantile levels");
  quantiles->add_option("--out", qn_out)->required();

  // density
  std::vector<std::string> dn_models;
  DataArgs dn_data;
  std::string dn_dates, dn_out;
  double dn_tmin = 0.0, dn_tmax = -1.0, dn_tstep = 0.25;
  int dn_window = 7;
  CLI::App* density = app.add_subcommand("density", "model densities plus windowed kde");
  density->add_option("--model", dn_models, "model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  add_data_flags(density, dn_data);
  density->add_option("--dates", dn_dates, "comma-separated YYYY-MM-DD dates")->required();
  density->add_option("--tmin", dn_tmin);
  density->add_option("--tmax", dn_tmax);
  density->add_option("--tstep", dn_tstep);
  density->add_option("--half-window", dn_window, "kde day half-window");
  density->add_option("--out", dn_out)->required();

  // score
  DataArgs sc_data;
  FitFlags sc_flags;
  std::string sc_kind = "crps", sc_models = "bats,skew", sc_tail = "upper";
  std::string sc_pq = "0.95,0.99,0.995", sc_outdir;
  double sc_pmu = 0.95;
  CLI::App* score = app.add_subcommand("score", "cross-validated model comparison");
  add_data_flags(score, sc_data);
  add_fit_flags(score, sc_flags);
  score->add_option("--kind", sc_kind, "crps | wcrps");
  score->add_option("--models", sc_models, "two models for the crps table");
  score->add_option("--tail", sc_tail, "upper | lower (wcrps)");
  score->add_option("--pq", sc_pq, "tail quantile levels (wcrps)");
  score->add_option("--pmu", sc_pmu, "censoring threshold level (wcrps)");
  score->add_option("--outdir", sc_outdir)->required();

  // change
  std::string ch_model, ch_q = "0.001,0.999", ch_out;
  int ch_year0 = 0, ch_year1 = 0;
  bool ch_same_q = false;
  std::size_t ch_bootstrap = 0;
  DataArgs ch_data;
  FitFlags ch_flags;
  CLI::App* change = app.add_subcommand("change", "quantile change curves between years");
  change->add_option("--model", ch_model)->required()->check(CLI::ExistingFile);
  change->add_option("--year0", ch_year0)->required();
  change->add_option("--year1", ch_year1)->required();
  change->add_option("--q", ch_q);
  change->add_flag("--same-q", ch_same_q, "difference same quantile instead of the median");
  change->add_option("--bootstrap", ch_bootstrap, "bootstrap replicates for intervals");
  change->add_option("--data", ch_data.data_path, "daily CSV (needed with --bootstrap)");
  change->add_option("--covariate", ch_data.covariate_path);
  change->add_option("--covariate-aux", ch_data.covariate_aux_path);
  change->add_option("--min-hours", ch_data.min_hours);
  change->add_flag("--fahrenheit", ch_data.fahrenheit);
  add_fit_flags(change, ch_flags);
  change->add_option("--out", ch_out)->required();

  // spreads
  std::string sp_model, sp_out;
  int sp_year0 = 0, sp_year1 = 0, sp_step = 1;
  CLI::App* spreads = app.add_subcommand("spreads", "annual quantile spread series");
  spreads->add_option("--model", sp_model)->required()->check(CLI::ExistingFile);
  spreads->add_option("--year0", sp_year0)->required();
  spreads->add_option("--year1", sp_year1)->required();
  spreads->add_option("--step", sp_step, "year stride");
  spreads->add_option("--out", sp_out)->required();

  // simulate
  std::string sim_model, sim_out;
  int sim_year0 = 0, sim_year1 = 0;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "draw synthetic daily series");
  simulate->add_option("--model", sim_model)->required()->check(CLI::ExistingFile);
  simulate->add_option("--year0", sim_year0)->required();
  simulate->add_option("--year1", sim_year1)->required();
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) emit_error_json("cli", e.what());
    return app.exit(e);
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_data, fit_flags, fit_model, fit_pmu, fit_out);
    if (quantiles->parsed()) return cmd_quantiles(qn_model, qn_year, qn_q, qn_out, blob);
    if (density->parsed())
      return cmd_density(dn_models, dn_data, dn_dates, dn_tmin, dn_tmax, dn_tstep,
                         dn_window, dn_out, blob);
    if (score->parsed())
      return cmd_score(sc_data, sc_flags, sc_kind, sc_models, sc_tail, sc_pq, sc_pmu,
                       sc_outdir, blob);
    if (change->parsed())
      return cmd_change(ch_model, ch_year0, ch_year1, ch_q, ch_same_q, ch_bootstrap,
                        ch_data, ch_flags, ch_out, blob);
    if (spreads->parsed())
      return cmd_spreads(sp_model, sp_year0, sp_year1, sp_step, sp_out, blob);
    if (simulate->parsed())
      return cmd_simulate(sim_model, sim_year0, sim_year1, sim_seed, sim_out, blob);
  } catch (const bats::parse_error& e) {
    emit_error_json("parse", e.what());
    return 1;
  } catch (const bats::config_error& e) {
    emit_error_json("config", e.what());
    return 1;
  } catch (const bats::insufficient_data_error& e) {
    emit_error_json("insufficient_data", e.what());
    return 1;
  } catch (const bats::integrity_error& e) {
    emit_error_json("integrity", e.what());
    return 1;
  } catch (const bats::numerical_error& e) {
    emit_error_json("numerical", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error_json("error", e.what());
    return 1;
  }
  return 0;
}
