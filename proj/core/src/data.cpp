#include "extskewt/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace extskewt {

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

}  // namespace

Dataset ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ingest_csv: empty file " + path);
  Dataset data;
  data.station_names = split_csv_line(line);
  const int d = static_cast<int>(data.station_names.size());
  if (d < 1) throw std::runtime_error("ingest_csv: no header columns");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != d)
      throw std::runtime_error("ingest_csv: ragged row at line " +
                               std::to_string(line_no));
    std::vector<double> row(d);
    for (int j = 0; j < d; ++j) {
      if (is_missing(cells[j])) {
        row[j] = nan_v;
        continue;
      }
      try {
        size_t used = 0;
        row[j] = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument(cells[j]);
      } catch (const std::exception&) {
        throw std::runtime_error("ingest_csv: non-numeric cell at line " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(j + 1));
      }
    }
    rows.push_back(std::move(row));
  }
  data.observations.resize(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) data.observations(i, j) = rows[i][j];
  return data;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (int j = 0; j < data.n_stations(); ++j)
    out << data.station_names[j] << (j + 1 < data.n_stations() ? "," : "\n");
  for (int i = 0; i < data.n_obs(); ++i) {
    for (int j = 0; j < data.n_stations(); ++j) {
      const double v = data.observations(i, j);
      if (std::isnan(v))
        out << "NA";
      else
        out << format_g17(v);
      out << (j + 1 < data.n_stations() ? "," : "\n");
    }
  }
}

Dataset to_frechet(const Dataset& data) {
  if (data.scale != Dataset::Scale::Raw)
    throw std::domain_error("to_frechet: data already on Frechet scale");
  Dataset out = data;
  out.scale = Dataset::Scale::Frechet;
  const int n = data.n_obs(), d = data.n_stations();
  for (int j = 0; j < d; ++j) {
    std::vector<int> obs;
    for (int i = 0; i < n; ++i)
      if (!std::isnan(data.observations(i, j))) obs.push_back(i);
    const int m = static_cast<int>(obs.size());
    if (m < 10)
      throw std::domain_error("to_frechet: column " + std::to_string(j + 1) +
                              " has fewer than 10 observed values");
    std::vector<int> order(obs);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return data.observations(a, j) < data.observations(b, j);
    });
    for (int r = 0; r < m; ++r) {
      const double u = (r + 1.0) / (m + 1.0);
      out.observations(order[r], j) = -1.0 / std::log(u);
    }
  }
  return out;
}

double quantile_type7(std::vector<double> x, double p) {
  x.erase(std::remove_if(x.begin(), x.end(),
                         [](double v) { return std::isnan(v); }),
          x.end());
  if (x.empty()) throw std::domain_error("quantile_type7: no data");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("quantile_type7: p in [0,1]");
  std::sort(x.begin(), x.end());
  const double h = (x.size() - 1.0) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

std::uint64_t RunManifest::config_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(config_echo);
  mix(command_line);
  return h;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string RunManifest::to_json() const {
  std::ostringstream os;
  os << "{\n";
  os << "  \"command_line\": \"" << json_escape(command_line) << "\",\n";
  os << "  \"config_hash\": \"" << std::hex << config_hash() << std::dec
     << "\",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"version\": \"" << json_escape(version) << "\",\n";
  os << "  \"wall_time_s\": " << format_g17(wall_time_s) << ",\n";
  os << "  \"outputs\": [";
  for (size_t i = 0; i < outputs.size(); ++i) {
    os << "\"" << json_escape(outputs[i]) << "\"";
    if (i + 1 < outputs.size()) os << ", ";
  }
  os << "],\n";
  os << "  \"config\": \"" << json_escape(config_echo) << "\"\n";
  os << "}\n";
  return os.str();
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunManifest: cannot open " + path);
  out << to_json();
}

}  // namespace extskewt
