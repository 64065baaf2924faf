#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bats/errors.hpp"
#include "bats/ingest.hpp"
#include "bats/model_io.hpp"
#include "bats/rng.hpp"
#include "test_helpers.hpp"

using namespace bats;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "batfit_cli_tests";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(BATFIT_BIN) + " " + args + " >/dev/null 2>" +
                    (scratch_dir() / "stderr.txt").string();
  return std::system(cmd.c_str());
}

std::string last_stderr() { return read_file(scratch_dir() / "stderr.txt"); }

YearlyCovariate tiny_covariate() { return YearlyCovariate({2000, 2001}, {5.8, 5.81}); }

}  // namespace

TEST_CASE("ingest parses, filters and reports") {
  fs::path csv = scratch_dir() / "obs.csv";
  write_file(csv,
             "station,date,temp,hours\n"
             "X1,2000-01-02,3.5,24\n"
             "X1,2000-01-01,2.5,24\n"
             "X1,2000-01-03,-120.0,24\n"   // fails sanity
             "X1,2000-01-04,4.0,10\n"      // too few hours
             "X1,2000-01-02,9.9,24\n"      // duplicate date, first kept
             "X1,2000-01-05,5.5,20\n");
  IngestReport report;
  ObservationSeries s = ingest(csv.string(), tiny_covariate(), 20, false, &report);
  CHECK(s.station_id == "X1");
  REQUIRE(s.size() == 3);
  CHECK(s.dates[0] == Date{2000, 1, 1});
  CHECK(s.values[0] == 2.5);
  CHECK(s.values[1] == 3.5);  // sorted, first duplicate kept
  CHECK(s.values[2] == 5.5);
  CHECK(report.rows_read == 6);
  CHECK(report.dropped_sanity == 1);
  CHECK(report.dropped_hours == 1);
  CHECK(report.dropped_duplicate == 1);
  CHECK(s.first_obs == Date{2000, 1, 1});
}

TEST_CASE("ingest handles the hours-free layout and unit conversion") {
  fs::path csv = scratch_dir() / "obs_f.csv";
  write_file(csv,
             "station,date,temp\n"
             "X2,2000-06-01,68.0\n"
             "X2,2000-06-02,32.0\n");
  ObservationSeries s = ingest(csv.string(), tiny_covariate(), 20, true, nullptr);
  CHECK(s.values[0] == doctest::Approx(20.0));
  CHECK(s.values[1] == doctest::Approx(0.0));
}

TEST_CASE("ingest errors carry line numbers") {
  fs::path csv = scratch_dir() / "bad.csv";
  write_file(csv, "station,date,temp\nX,2000-01-01,1.0\nX,2000-13-01,2.0\n");
  try {
    ingest(csv.string(), tiny_covariate(), 20, false, nullptr);
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
  }

  write_file(csv, "station,date\nX,2000-01-01\n");
  CHECK_THROWS_AS(ingest(csv.string(), tiny_covariate(), 20, false, nullptr), parse_error);

  write_file(csv, "station,date,temp\nX,2000-01-01,-200\n");
  CHECK_THROWS_AS(ingest(csv.string(), tiny_covariate(), 20, false, nullptr),
                  insufficient_data_error);
}

TEST_CASE("covariate csv reading") {
  fs::path csv = scratch_dir() / "cov.csv";
  write_file(csv, "year,value\n2001,5.9\n2000,5.8\n");
  YearlyCovariate c = read_covariate_csv(csv.string());
  CHECK(c.at(2000) == 5.8);
  CHECK(c.at(2001) == 5.9);

  write_file(csv, "year,value\n2000,5.8\n2000,5.9\n");
  CHECK_THROWS_AS(read_covariate_csv(csv.string()), parse_error);
}

TEST_CASE("cli end-to-end: fit, quantiles, simulate, change, spreads") {
  fs::path dir = scratch_dir();

  // Synthetic symmetric stationary data around 10 with the library itself.
  YearlyCovariate cov = testutil::linear_covariate(1994, 2003, 6.0, 0.0);
  SeasonalBatsModel truth = testutil::ground_truth_model(cov, {1994, 1, 1});
  truth.loc_lower.spline.assign(8, 0.0);
  truth.loc_upper.spline.assign(8, 0.0);
  truth.scale_lower.spline.assign(8, 0.0);
  truth.scale_upper.spline.assign(8, 0.0);
  truth.loc_lower.trend = truth.loc_lower.trend_cos = truth.loc_lower.trend_sin = 0.0;
  truth.loc_upper.trend = truth.loc_upper.trend_cos = truth.loc_upper.trend_sin = 0.0;
  truth.loc_lower.intercept = 7.0;
  truth.loc_upper.intercept = 13.0;
  truth.scale_lower.intercept = 0.6;
  truth.scale_upper.intercept = 0.6;
  truth.kappa0 = 0.0;
  truth.kappa1 = 0.0;
  Rng rng(2718);
  ObservationSeries data = testutil::simulate_daily(truth, 1994, 2003, rng);

  std::ostringstream obs_csv;
  obs_csv << "station,date,temp\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", data.values[i]);
    obs_csv << "SYNTH," << data.dates[i].to_string() << "," << buf << "\n";
  }
  write_file(dir / "e2e_obs.csv", obs_csv.str());
  std::ostringstream cov_csv;
  cov_csv << "year,value\n";
  for (std::size_t i = 0; i < cov.size(); ++i)
    cov_csv << cov.years()[i] << "," << cov.values()[i] << "\n";
  write_file(dir / "e2e_cov.csv", cov_csv.str());

  // fit
  std::string model_path = (dir / "e2e_model.json").string();
  REQUIRE(run_cli("fit --data " + (dir / "e2e_obs.csv").string() + " --covariate " +
                  (dir / "e2e_cov.csv").string() + " --model bats --scale-grid 0,1 --out " +
                  model_path) == 0);
  ModelDocument doc = load_model(model_path);
  REQUIRE(doc.kind == ModelDocument::Kind::bats);

  // quantiles: median curve flat at the common center 10.
  std::string qcsv = (dir / "e2e_q.csv").string();
  REQUIRE(run_cli("quantiles --model " + model_path + " --year 2000 --q 0.5 --out " + qcsv) ==
          0);
  std::ifstream qin(qcsv);
  std::string line;
  int rows = 0;
  double qmin = 1e300, qmax = -1e300;
  while (std::getline(qin, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("day", 0) == 0) continue;
    double q = std::stod(line.substr(line.find(',') + 1));
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
    ++rows;
  }
  CHECK(rows == 365);
  // Flat at the known center, up to the sampling noise of a ten-year fit.
  CHECK(qmin > 9.4);
  CHECK(qmax < 10.6);
  CHECK(qmax - qmin < 0.6);

  // simulate determinism: identical bytes for the same seed.
  std::string s1 = (dir / "sim1.csv").string(), s2 = (dir / "sim2.csv").string();
  REQUIRE(run_cli("simulate --model " + model_path +
                  " --year0 2000 --year1 2001 --seed 42 --out " + s1) == 0);
  REQUIRE(run_cli("simulate --model " + model_path +
                  " --year0 2000 --year1 2001 --seed 42 --out " + s2) == 0);
  CHECK(read_file(s1) == read_file(s2));
  REQUIRE(run_cli("simulate --model " + model_path +
                  " --year0 2000 --year1 2001 --seed 43 --out " + s2) == 0);
  CHECK(read_file(s1) != read_file(s2));

  // The simulated file is canonical: re-ingesting reproduces it exactly.
  ObservationSeries sim = ingest(s1, cov, 20, false, nullptr);
  CHECK(sim.size() == 731);
  std::ostringstream reemit;
  reemit << "station,date,temp\n";
  for (std::size_t i = 0; i < sim.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", sim.values[i]);
    reemit << sim.station_id << "," << sim.dates[i].to_string() << "," << buf << "\n";
  }
  std::string original = read_file(s1);
  std::string body = original.substr(original.find("station,date,temp"));
  CHECK(body == reemit.str());

  // change: zero trend means year-independent quantiles, so change == 0
  // for the same quantile baseline.
  std::string ccsv = (dir / "e2e_change.csv").string();
  REQUIRE(run_cli("change --model " + model_path +
                  " --year0 1996 --year1 2002 --q 0.5 --same-q --out " + ccsv) == 0);
  std::ifstream cin_(ccsv);
  while (std::getline(cin_, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("day", 0) == 0) continue;
    double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(std::fabs(v) < 1e-9);
  }

  // spreads: positive and roughly constant across years for this model.
  std::string spcsv = (dir / "e2e_spreads.csv").string();
  REQUIRE(run_cli("spreads --model " + model_path +
                  " --year0 1996 --year1 1998 --out " + spcsv) == 0);
  std::ifstream spin(spcsv);
  int sprows = 0;
  while (std::getline(spin, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("year", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) > 0.0);
    ++sprows;
  }
  CHECK(sprows == 3);

  // Output files carry the metadata header block.
  std::string qtext = read_file(qcsv);
  CHECK(qtext.rfind("# tool=batfit", 0) == 0);
  CHECK(qtext.find("# config_hash=") != std::string::npos);
}

TEST_CASE("cli end-to-end: self-comparison score table is zero") {
  fs::path dir = scratch_dir();
  // Reuse fixture files from the previous case; they exist because tests in
  // this binary run in declaration order.
  std::string outdir = (dir / "score_out").string();
  REQUIRE(run_cli("score --data " + (dir / "e2e_obs.csv").string() + " --covariate " +
                  (dir / "e2e_cov.csv").string() +
                  " --kind crps --models bats,bats --scale-grid 1 --outdir " + outdir) == 0);
  std::ifstream in(outdir + "/crps_summary.csv");
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string label, value;
    std::getline(ss, label, ',');
    std::getline(ss, value, ',');
    CHECK(std::stod(value) == doctest::Approx(0.0));
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("cli end-to-end: density with kde columns") {
  fs::path dir = scratch_dir();
  std::string model_path = (dir / "e2e_model.json").string();
  std::string dcsv = (dir / "e2e_density.csv").string();
  REQUIRE(run_cli("density --model " + model_path + " --data " +
                  (dir / "e2e_obs.csv").string() + " --covariate " +
                  (dir / "e2e_cov.csv").string() +
                  " --dates 2000-01-01,2000-07-01 --tmin -2 --tmax 22 --tstep 0.25 --out " +
                  dcsv) == 0);
  std::ifstream in(dcsv);
  REQUIRE(in.good());
  std::string line, header;
  bool saw_bandwidth = false;
  while (std::getline(in, line)) {
    if (line.rfind("# kde_bandwidth_rule_", 0) == 0)
      saw_bandwidth = line.find("normal-reference") != std::string::npos;
    if (line.rfind("temp,", 0) == 0) {
      header = line;
      break;
    }
  }
  CHECK(saw_bandwidth);
  CHECK(header.find("bats_2000-01-01") != std::string::npos);
  CHECK(header.find("kde_2000-07-01") != std::string::npos);
  // Density columns are nonnegative and the model density has appreciable
  // mass around the known center.
  double best = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    double v = std::stod(cell);
    CHECK(v >= 0.0);
    best = std::max(best, v);
    ++rows;
  }
  CHECK(rows == 97);
  CHECK(best > 0.05);
}

TEST_CASE("cli end-to-end: tail score tables") {
  fs::path dir = scratch_dir();
  std::string outdir = (dir / "wcrps_out").string();
  REQUIRE(run_cli("score --data " + (dir / "e2e_obs.csv").string() + " --covariate " +
                  (dir / "e2e_cov.csv").string() +
                  " --kind wcrps --tail upper --pmu 0.9 --pq 0.95 --scale-grid 1 --outdir " +
                  outdir) == 0);
  std::ifstream in(outdir + "/wcrps_summary.csv");
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string label, comparison, value;
    std::getline(ss, label, ',');
    std::getline(ss, comparison, ',');
    std::getline(ss, value, ',');
    CHECK(label == "0.95");
    CHECK((comparison == "bats_vs_gpd" || comparison == "skew_vs_gpd"));
    CHECK(std::isfinite(std::stod(value)));
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("cli end-to-end: change with bootstrap intervals") {
  fs::path dir = scratch_dir();
  std::string model_path = (dir / "e2e_model.json").string();
  std::string ccsv = (dir / "e2e_change_boot.csv").string();
  REQUIRE(run_cli("change --model " + model_path +
                  " --year0 1996 --year1 2002 --q 0.5 --bootstrap 20 --seed 11 --data " +
                  (dir / "e2e_obs.csv").string() + " --covariate " +
                  (dir / "e2e_cov.csv").string() + " --out " + ccsv) == 0);
  // Main curve file gains interval columns; lo <= hi everywhere.
  std::ifstream in(ccsv);
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("day,", 0) == 0) {
      CHECK(line.find("lo_q0.5") != std::string::npos);
      CHECK(line.find("hi_q0.5") != std::string::npos);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    double lo = std::stod(cell);
    std::getline(ss, cell, ',');
    double hi = std::stod(cell);
    CHECK(lo <= hi);
    ++rows;
  }
  CHECK(rows == 365);
  CHECK(fs::exists(ccsv + ".replicates.csv"));
  CHECK(fs::exists(ccsv + ".ci.csv"));

  // Replicate file has 20 x 365 rows with convergence flags.
  std::ifstream rin(ccsv + ".replicates.csv");
  int rrows = 0;
  while (std::getline(rin, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("replicate,", 0) == 0) continue;
    ++rrows;
  }
  CHECK(rrows == 20 * 365);
}

TEST_CASE("cli failure emits machine-readable error json") {
  int rc = run_cli("quantiles --model /nonexistent.json --year 2000 --out /tmp/x.csv");
  CHECK(rc != 0);
  std::string err = last_stderr();
  CHECK(err.find("\"error\"") != std::string::npos);
  CHECK(err.find("\"message\"") != std::string::npos);
}
