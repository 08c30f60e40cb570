#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "extskewt/qmc.hpp"

// Data plumbing: CSV ingestion with missing markers, the empirical
// unit-Frechet marginal transform, type-7 quantiles, and the run manifest
// that makes batch outputs reproducible.

namespace extskewt {

struct Dataset {
  enum class Scale { Raw, Frechet };

  std::vector<std::string> station_names;
  std::vector<Vector> coordinates;  // optional, empty when absent
  Matrix observations;              // NaN marks missing cells
  Scale scale = Scale::Raw;

  int n_stations() const { return static_cast<int>(station_names.size()); }
  int n_obs() const { return static_cast<int>(observations.rows()); }
};

// header row of station names; "NA" or empty cells become missing; ragged or
// non-numeric rows raise with the offending line number
Dataset ingest_csv(const std::string& path);
void write_csv(const Dataset& data, const std::string& path);

// per column: ranks -> i/(n+1) -> x = -1/log(u); missing preserved; columns
// with fewer than 10 observed values are rejected
Dataset to_frechet(const Dataset& data);

// type-7 empirical quantile (the interpolation used for the report-scale
// thresholds)
double quantile_type7(std::vector<double> x, double p);

struct RunManifest {
  std::string command_line;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::string version;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;

  std::uint64_t config_hash() const;  // FNV-1a over the canonical echo
  std::string to_json() const;
  void write(const std::string& path) const;
};

// CSV cell formatting with 17 significant digits (bit-exact reload)
std::string format_g17(double x);

}  // namespace extskewt
