#include "bats/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bats {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json basis_to_json(const PeriodicSplineBasis& b) {
  return {{"n_basis", b.n_basis()}, {"period", b.period()}, {"knots", b.knots()}};
}

PeriodicSplineBasis basis_from_json(const ordered_json& j) {
  PeriodicSplineBasis b = build_periodic_spline_basis(j.at("n_basis").get<int>(),
                                                      j.at("period").get<double>());
  // Knots are derived from (n_basis, period); stored for readability.
  return b;
}

ordered_json covariate_to_json(const YearlyCovariate& c) {
  return {{"years", c.years()}, {"values", c.values()}};
}

YearlyCovariate covariate_from_json(const ordered_json& j) {
  return YearlyCovariate(j.at("years").get<std::vector<int>>(),
                         j.at("values").get<std::vector<double>>());
}

ordered_json loc_to_json(const LocationCoeffs& c) {
  return {{"intercept", c.intercept},
          {"spline", c.spline},
          {"trend", c.trend},
          {"trend_cos", c.trend_cos},
          {"trend_sin", c.trend_sin}};
}

LocationCoeffs loc_from_json(const ordered_json& j) {
  LocationCoeffs c;
  c.intercept = j.at("intercept").get<double>();
  c.spline = j.at("spline").get<std::vector<double>>();
  c.trend = j.at("trend").get<double>();
  c.trend_cos = j.at("trend_cos").get<double>();
  c.trend_sin = j.at("trend_sin").get<double>();
  return c;
}

ordered_json scale_to_json(const LogScaleCoeffs& c) {
  return {{"intercept", c.intercept}, {"spline", c.spline}};
}

LogScaleCoeffs scale_from_json(const ordered_json& j) {
  LogScaleCoeffs c;
  c.intercept = j.at("intercept").get<double>();
  c.spline = j.at("spline").get<std::vector<double>>();
  return c;
}

ordered_json diag_to_json(const FitDiagnostics& d) {
  return {{"neg_loglik", d.neg_loglik},
          {"converged", d.converged},
          {"iterations", d.iterations},
          {"gradient_norm", d.gradient_norm},
          {"support_violations", d.support_violations},
          {"init_used", d.init_used},
          {"message", d.message}};
}

FitDiagnostics diag_from_json(const ordered_json& j) {
  FitDiagnostics d;
  d.neg_loglik = j.at("neg_loglik").get<double>();
  d.converged = j.at("converged").get<bool>();
  d.iterations = j.at("iterations").get<std::size_t>();
  d.gradient_norm = j.at("gradient_norm").get<double>();
  d.support_violations = j.at("support_violations").get<std::size_t>();
  d.init_used = j.at("init_used").get<std::vector<double>>();
  d.message = j.at("message").get<std::string>();
  return d;
}

}  // namespace

std::string to_json_text(const ModelDocument& doc) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  switch (doc.kind) {
    case ModelDocument::Kind::bats: {
      const SeasonalBatsModel& m = doc.bats.value();
      j["model_type"] = "bats";
      j["station_id"] = m.station_id;
      j["first_obs"] = m.first_obs.to_string();
      j["basis"] = basis_to_json(m.basis);
      j["covariate"] = covariate_to_json(m.covariate);
      j["coefficients"] = {{"loc_lower", loc_to_json(m.loc_lower)},
                           {"loc_upper", loc_to_json(m.loc_upper)},
                           {"scale_lower", scale_to_json(m.scale_lower)},
                           {"scale_upper", scale_to_json(m.scale_upper)},
                           {"kappa0", m.kappa0},
                           {"kappa1", m.kappa1},
                           {"log_nu", m.log_nu}};
      break;
    }
    case ModelDocument::Kind::skew_normal: {
      const SeasonalSkewNormalModel& m = doc.skew.value();
      j["model_type"] = "skew_normal";
      j["station_id"] = m.station_id;
      j["first_obs"] = m.first_obs.to_string();
      j["basis"] = basis_to_json(m.basis);
      j["covariate"] = covariate_to_json(m.covariate);
      j["coefficients"] = {{"loc", loc_to_json(m.loc)},
                           {"log_scale", scale_to_json(m.log_scale)},
                           {"skew", scale_to_json(m.skew)}};
      break;
    }
    case ModelDocument::Kind::gpd: {
      const SeasonalGpdModel& m = doc.gpd.value();
      j["model_type"] = "gpd";
      j["station_id"] = m.station_id;
      j["first_obs"] = m.first_obs.to_string();
      j["basis"] = basis_to_json(m.basis);
      j["covariate"] = covariate_to_json(m.covariate);
      j["coefficients"] = {{"threshold", scale_to_json(m.threshold)},
                           {"log_scale", loc_to_json(m.log_scale)},
                           {"xi", m.xi},
                           {"tail", m.tail == Tail::upper ? "upper" : "lower"},
                           {"p_mu", m.p_mu}};
      break;
    }
  }
  j["diagnostics"] = diag_to_json(doc.diagnostics);
  return j.dump(2) + "\n";
}

ModelDocument from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("unsupported model format_version");
  ModelDocument doc;
  const std::string type = j.at("model_type").get<std::string>();
  const auto& co = j.at("coefficients");
  if (type == "bats") {
    doc.kind = ModelDocument::Kind::bats;
    SeasonalBatsModel m;
    m.station_id = j.at("station_id").get<std::string>();
    m.first_obs = Date::parse(j.at("first_obs").get<std::string>());
    m.basis = basis_from_json(j.at("basis"));
    m.covariate = covariate_from_json(j.at("covariate"));
    m.loc_lower = loc_from_json(co.at("loc_lower"));
    m.loc_upper = loc_from_json(co.at("loc_upper"));
    m.scale_lower = scale_from_json(co.at("scale_lower"));
    m.scale_upper = scale_from_json(co.at("scale_upper"));
    m.kappa0 = co.at("kappa0").get<double>();
    m.kappa1 = co.at("kappa1").get<double>();
    m.log_nu = co.at("log_nu").get<double>();
    doc.bats = std::move(m);
  } else if (type == "skew_normal") {
    doc.kind = ModelDocument::Kind::skew_normal;
    SeasonalSkewNormalModel m;
    m.station_id = j.at("station_id").get<std::string>();
    m.first_obs = Date::parse(j.at("first_obs").get<std::string>());
    m.basis = basis_from_json(j.at("basis"));
    m.covariate = covariate_from_json(j.at("covariate"));
    m.loc = loc_from_json(co.at("loc"));
    m.log_scale = scale_from_json(co.at("log_scale"));
    m.skew = scale_from_json(co.at("skew"));
    doc.skew = std::move(m);
  } else if (type == "gpd") {
    doc.kind = ModelDocument::Kind::gpd;
    SeasonalGpdModel m;
    m.station_id = j.at("station_id").get<std::string>();
    m.first_obs = Date::parse(j.at("first_obs").get<std::string>());
    m.basis = basis_from_json(j.at("basis"));
    m.covariate = covariate_from_json(j.at("covariate"));
    m.threshold = scale_from_json(co.at("threshold"));
    m.log_scale = loc_from_json(co.at("log_scale"));
    m.xi = co.at("xi").get<double>();
    m.tail = co.at("tail").get<std::string>() == "upper" ? Tail::upper : Tail::lower;
    m.p_mu = co.at("p_mu").get<double>();
    doc.gpd = std::move(m);
  } else {
    throw std::runtime_error("unknown model_type '" + type + "'");
  }
  doc.diagnostics = diag_from_json(j.at("diagnostics"));
  return doc;
}

void save_model(const ModelDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_json_text(doc);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace bats
