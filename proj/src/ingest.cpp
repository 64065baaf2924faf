#include "bats/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "bats/errors.hpp"

namespace bats {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, long line) {
  const std::string t = trim(s);
  double v;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw parse_error("not a number: '" + t + "'", line);
  return v;
}

long parse_long(const std::string& s, long line) {
  const std::string t = trim(s);
  long v;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw parse_error("not an integer: '" + t + "'", line);
  return v;
}

}  // namespace

ObservationSeries ingest(const std::string& csv_path, const YearlyCovariate& covariate,
                         int min_hours, bool fahrenheit, IngestReport* report) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");

  IngestReport rep;
  std::string line;
  long line_no = 0;

  // Leading comment lines carry output metadata; skip them.
  do {
    if (!std::getline(in, line)) throw parse_error("empty file", line_no + 1);
    ++line_no;
  } while (!line.empty() && line[0] == '#');
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  const bool has_hours = header.size() == 4 && header[3] == "hours";
  if (!((header.size() == 3 || has_hours) && header[0] == "station" &&
        header[1] == "date" && header[2] == "temp"))
    throw parse_error("expected header 'station,date,temp[,hours]'", line_no);

  struct Row {
    Date date;
    double temp;
  };
  std::vector<Row> rows;
  std::string station;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw parse_error("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()),
                        line_no);
    ++rep.rows_read;
    std::string sid = trim(f[0]);
    if (station.empty())
      station = sid;
    else if (sid != station)
      throw parse_error("mixed station ids ('" + station + "' vs '" + sid + "')", line_no);

    Date date;
    try {
      date = Date::parse(trim(f[1]));
    } catch (const std::invalid_argument& e) {
      throw parse_error(e.what(), line_no);
    }
    double temp = parse_double(f[2], line_no);
    if (fahrenheit) temp = (temp - 32.0) * 5.0 / 9.0;

    if (has_hours) {
      long hours = parse_long(f[3], line_no);
      if (hours < min_hours) {
        ++rep.dropped_hours;
        continue;
      }
    }
    if (!std::isfinite(temp) || temp < kMinSaneTempC || temp > kMaxSaneTempC) {
      ++rep.dropped_sanity;
      continue;
    }
    rows.push_back({date, temp});
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  std::vector<Date> dates;
  std::vector<double> values;
  for (const Row& r : rows) {
    if (!dates.empty() && dates.back() == r.date) {
      ++rep.dropped_duplicate;
      continue;
    }
    dates.push_back(r.date);
    values.push_back(r.temp);
  }

  if (report) *report = rep;
  if (dates.empty()) throw insufficient_data_error("ingest: no valid observations");
  return make_series(station, std::move(dates), std::move(values), covariate);
}

YearlyCovariate read_covariate_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");
  std::string line;
  long line_no = 0;
  do {
    if (!std::getline(in, line)) throw parse_error("empty file", line_no + 1);
    ++line_no;
  } while (!line.empty() && line[0] == '#');
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() != 2 || header[0] != "year" || header[1] != "value")
    throw parse_error("expected header 'year,value'", line_no);

  std::map<int, double> series;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 2) throw parse_error("expected 2 fields", line_no);
    int year = static_cast<int>(parse_long(f[0], line_no));
    if (series.count(year)) throw parse_error("duplicate year " + std::to_string(year), line_no);
    series[year] = parse_double(f[1], line_no);
  }
  std::vector<int> years;
  std::vector<double> values;
  for (const auto& [y, v] : series) {
    years.push_back(y);
    values.push_back(v);
  }
  return YearlyCovariate(std::move(years), std::move(values));
}

}  // namespace bats
