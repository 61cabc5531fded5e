#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geordd/data.hpp"
#include "geordd/geometry.hpp"
#include "geordd/gp.hpp"
#include "geordd/late.hpp"
#include "geordd/testing.hpp"

namespace geordd {

/// Column mapping for the units CSV. Header is required; x/y/outcome must
/// resolve, region and covariates are optional.
struct ColumnMapping {
  std::string x = "x";
  std::string y = "y";
  std::string outcome = "outcome";
  std::string region = "region";
  std::vector<std::string> covariates;
};

struct AnalysisConfig {
  std::string units_csv;
  std::string border_file;              // GeoJSON LineString or vertex CSV
  std::string region_polygons_file;     // GeoJSON Polygon/MultiPolygon; optional
  ColumnMapping columns;
  std::string treatment_label = "treatment";
  std::string control_label = "control";
  bool log_transform = false;

  std::optional<Hyperparams> hyperparams;  // fixed theta; fit when absent
  Hyperparams fit_init;                    // starting point for the fit
  bool joint_covariate_path = false;       // default: residualize via beta-hat

  int sentinel_count = 100;
  std::optional<double> delta;          // default 2 * lengthscale
  std::optional<double> grid_spacing;   // default lengthscale / 5
  std::optional<double> kde_bandwidth;  // default lengthscale
  int bootstrap_draws = 10000;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::vector<WeightScheme> schemes;  // LATEs to compute, in output order
  std::vector<TestMethod> tests;
  bool placebo = false;
  std::vector<double> placebo_angles;  // default 1..180
  bool write_full_covariance = false;

  // Directory the config file lives in; relative data paths resolve against
  // it. Not part of the serialized config (or its hash).
  std::string base_dir;
};

AnalysisConfig parse_config(const nlohmann::json& j);
AnalysisConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const AnalysisConfig& config);

/// FNV-1a over the canonical JSON dump; stable across platforms.
std::string config_hash(const AnalysisConfig& config);

struct ValidationReport {
  int rows_read = 0;
  int rows_dropped = 0;
  std::vector<int> dropped_rows;  // 1-based CSV data row numbers
};

struct LoadedData {
  RegionData treatment;
  RegionData control;
  Border border;
  std::vector<Polygon> polygons;
  ValidationReport validation;
};

LoadedData load_dataset(const AnalysisConfig& config);

Border load_border_file(const std::string& path);
std::vector<Polygon> load_polygons_file(const std::string& path);

/// Minimal CSV: comma separated, double quotes respected, header row required.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string format_double(double v);  // %.17g

WeightScheme scheme_from_name(const std::string& name);
TestMethod method_from_name(const std::string& name);

}  // namespace geordd
