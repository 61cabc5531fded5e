#include "geordd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace geordd {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(std::move(cell));
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw InputError(path + ": empty file");
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

WeightScheme scheme_from_name(const std::string& name) {
  if (name == "UNIF") return WeightScheme::kUniform;
  if (name == "RHO") return WeightScheme::kDensity;
  if (name == "INV") return WeightScheme::kInverseVariance;
  if (name == "PROJ") return WeightScheme::kProjected;
  if (name == "GEO") return WeightScheme::kGeo;
  if (name == "POP") return WeightScheme::kPop;
  throw InputError("unknown LATE scheme '" + name + "'");
}

TestMethod method_from_name(const std::string& name) {
  if (name == "INV_ANALYTIC") return TestMethod::kInvAnalytic;
  if (name == "INV_BOOTSTRAP") return TestMethod::kInvBootstrap;
  if (name == "MLL_BOOTSTRAP") return TestMethod::kMllBootstrap;
  if (name == "CHI2_BOOTSTRAP") return TestMethod::kChi2Bootstrap;
  throw InputError("unknown test method '" + name + "'");
}

namespace {

Hyperparams hyperparams_from_json(const nlohmann::json& j, const Hyperparams& base) {
  Hyperparams theta = base;
  theta.lengthscale = j.value("lengthscale", theta.lengthscale);
  theta.gp_scale = j.value("gp_scale", theta.gp_scale);
  theta.noise = j.value("noise", theta.noise);
  theta.mean_scale = j.value("mean_scale", theta.mean_scale);
  theta.beta_scale = j.value("beta_scale", theta.beta_scale);
  return theta;
}

nlohmann::json hyperparams_to_json(const Hyperparams& theta) {
  return {{"lengthscale", theta.lengthscale},
          {"gp_scale", theta.gp_scale},
          {"noise", theta.noise},
          {"mean_scale", theta.mean_scale},
          {"beta_scale", theta.beta_scale}};
}

}  // namespace

AnalysisConfig parse_config(const nlohmann::json& j) {
  AnalysisConfig config;
  config.units_csv = j.value("units_csv", "");
  config.border_file = j.value("border", "");
  config.region_polygons_file = j.value("region_polygons", "");

  if (j.contains("columns")) {
    const auto& c = j.at("columns");
    config.columns.x = c.value("x", "x");
    config.columns.y = c.value("y", "y");
    config.columns.outcome = c.value("outcome", "outcome");
    config.columns.region = c.value("region", "region");
    if (c.contains("covariates")) {
      for (const auto& name : c.at("covariates")) {
        config.columns.covariates.push_back(name.get<std::string>());
      }
    }
  }
  config.treatment_label = j.value("treatment_label", config.treatment_label);
  config.control_label = j.value("control_label", config.control_label);
  config.log_transform = j.value("log_transform", false);

  if (j.contains("hyperparams")) {
    config.hyperparams = hyperparams_from_json(j.at("hyperparams"), Hyperparams{});
  }
  if (j.contains("fit_init")) {
    config.fit_init = hyperparams_from_json(j.at("fit_init"), config.fit_init);
  }
  config.joint_covariate_path = j.value("joint_covariate_path", false);

  config.sentinel_count = j.value("sentinel_count", 100);
  if (j.contains("delta")) config.delta = j.at("delta").get<double>();
  if (j.contains("grid_spacing")) config.grid_spacing = j.at("grid_spacing").get<double>();
  if (j.contains("kde_bandwidth")) config.kde_bandwidth = j.at("kde_bandwidth").get<double>();
  config.bootstrap_draws = j.value("bootstrap_draws", 10000);
  config.threads = j.value("threads", 0);
  if (j.contains("seed")) {
    config.seed = j.at("seed").get<std::uint64_t>();
    config.seed_set = true;
  }

  if (j.contains("schemes")) {
    for (const auto& name : j.at("schemes")) {
      config.schemes.push_back(scheme_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("tests")) {
    for (const auto& name : j.at("tests")) {
      config.tests.push_back(method_from_name(name.get<std::string>()));
    }
  }
  config.placebo = j.value("placebo", false);
  if (j.contains("placebo_angles")) {
    for (const auto& a : j.at("placebo_angles")) {
      config.placebo_angles.push_back(a.get<double>());
    }
  }
  config.write_full_covariance = j.value("write_full_covariance", false);

  if (config.sentinel_count < 1) throw InputError("config: sentinel_count must be >= 1");
  const bool wants_bootstrap =
      std::any_of(config.tests.begin(), config.tests.end(), [](TestMethod m) {
        return m != TestMethod::kInvAnalytic;
      });
  if (wants_bootstrap && config.bootstrap_draws < 100) {
    throw InputError("config: bootstrap_draws must be >= 100 when a bootstrap test is requested");
  }
  return config;
}

AnalysisConfig load_config_file(const std::string& path) {
  AnalysisConfig config = parse_config(read_json_file(path));
  config.base_dir = std::filesystem::path(path).parent_path().string();
  return config;
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

nlohmann::json config_to_json(const AnalysisConfig& config) {
  nlohmann::json j;
  j["units_csv"] = config.units_csv;
  j["border"] = config.border_file;
  j["region_polygons"] = config.region_polygons_file;
  j["columns"] = {{"x", config.columns.x},
                  {"y", config.columns.y},
                  {"outcome", config.columns.outcome},
                  {"region", config.columns.region},
                  {"covariates", config.columns.covariates}};
  j["treatment_label"] = config.treatment_label;
  j["control_label"] = config.control_label;
  j["log_transform"] = config.log_transform;
  if (config.hyperparams) j["hyperparams"] = hyperparams_to_json(*config.hyperparams);
  j["fit_init"] = hyperparams_to_json(config.fit_init);
  j["joint_covariate_path"] = config.joint_covariate_path;
  j["sentinel_count"] = config.sentinel_count;
  if (config.delta) j["delta"] = *config.delta;
  if (config.grid_spacing) j["grid_spacing"] = *config.grid_spacing;
  if (config.kde_bandwidth) j["kde_bandwidth"] = *config.kde_bandwidth;
  j["bootstrap_draws"] = config.bootstrap_draws;
  j["seed"] = config.seed;
  nlohmann::json schemes = nlohmann::json::array();
  for (const auto s : config.schemes) schemes.push_back(scheme_name(s));
  j["schemes"] = schemes;
  nlohmann::json tests = nlohmann::json::array();
  for (const auto t : config.tests) tests.push_back(method_name(t));
  j["tests"] = tests;
  j["placebo"] = config.placebo;
  j["write_full_covariance"] = config.write_full_covariance;
  return j;
}

std::string config_hash(const AnalysisConfig& config) {
  const std::string dump = config_to_json(config).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : dump) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

Point parse_coordinate_pair(const nlohmann::json& pair, const std::string& context) {
  if (!pair.is_array() || pair.size() < 2) {
    throw InputError(context + ": coordinate is not an [x, y] pair");
  }
  return {pair[0].get<double>(), pair[1].get<double>()};
}

std::vector<Point> parse_linestring_coords(const nlohmann::json& coords,
                                           const std::string& context) {
  std::vector<Point> vertices;
  for (const auto& pair : coords) vertices.push_back(parse_coordinate_pair(pair, context));
  return vertices;
}

void collect_polygons(const nlohmann::json& geometry, std::vector<Polygon>& out,
                      const std::string& context) {
  const std::string type = geometry.value("type", "");
  if (type == "Polygon") {
    Polygon poly;
    for (const auto& ring : geometry.at("coordinates")) {
      poly.rings.push_back(parse_linestring_coords(ring, context));
    }
    out.push_back(std::move(poly));
  } else if (type == "MultiPolygon") {
    for (const auto& polygon : geometry.at("coordinates")) {
      Polygon poly;
      for (const auto& ring : polygon) {
        poly.rings.push_back(parse_linestring_coords(ring, context));
      }
      out.push_back(std::move(poly));
    }
  } else if (type == "Feature") {
    collect_polygons(geometry.at("geometry"), out, context);
  } else if (type == "FeatureCollection") {
    for (const auto& feature : geometry.at("features")) {
      collect_polygons(feature, out, context);
    }
  } else {
    throw InputError(context + ": unsupported geometry type '" + type + "'");
  }
}

bool looks_numeric(const std::string& s) {
  char* end = nullptr;
  const std::string trimmed = s;
  std::strtod(trimmed.c_str(), &end);
  return end != trimmed.c_str() && *end == '\0' && !trimmed.empty();
}

}  // namespace

Border load_border_file(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    const auto rows = read_csv(path);
    std::size_t first = 0;
    if (!rows.empty() && rows[0].size() >= 2 &&
        !(looks_numeric(rows[0][0]) && looks_numeric(rows[0][1]))) {
      first = 1;  // header row
    }
    std::vector<Point> vertices;
    for (std::size_t r = first; r < rows.size(); ++r) {
      if (rows[r].size() < 2) {
        throw InputError(path + ": row " + std::to_string(r + 1) + " has fewer than 2 columns");
      }
      try {
        vertices.push_back({std::stod(rows[r][0]), std::stod(rows[r][1])});
      } catch (const std::exception&) {
        throw InputError(path + ": row " + std::to_string(r + 1) + " is not numeric");
      }
    }
    return Border(std::move(vertices));
  }

  const nlohmann::json j = read_json_file(path);
  const std::function<const nlohmann::json*(const nlohmann::json&)> find_linestring =
      [&](const nlohmann::json& node) -> const nlohmann::json* {
    const std::string type = node.value("type", "");
    if (type == "LineString") return &node;
    if (type == "Feature") return find_linestring(node.at("geometry"));
    if (type == "FeatureCollection") {
      for (const auto& feature : node.at("features")) {
        if (const auto* found = find_linestring(feature)) return found;
      }
    }
    return nullptr;
  };
  const nlohmann::json* linestring = find_linestring(j);
  if (!linestring) throw InputError(path + ": no LineString geometry found");
  return Border(parse_linestring_coords(linestring->at("coordinates"), path));
}

std::vector<Polygon> load_polygons_file(const std::string& path) {
  std::vector<Polygon> out;
  collect_polygons(read_json_file(path), out, path);
  if (out.empty()) throw InputError(path + ": no polygons found");
  return out;
}

LoadedData load_dataset(const AnalysisConfig& config) {
  const auto rows = read_csv(resolve_path(config.base_dir, config.units_csv));
  const auto& header = rows.front();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;

  const auto resolve = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) {
      throw InputError(config.units_csv + ": missing column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t col_x = resolve(config.columns.x);
  const std::size_t col_y = resolve(config.columns.y);
  const std::size_t col_outcome = resolve(config.columns.outcome);
  const bool has_region = index.count(config.columns.region) > 0;
  const std::size_t col_region = has_region ? index[config.columns.region] : 0;
  std::vector<std::size_t> col_covariates;
  for (const auto& name : config.columns.covariates) col_covariates.push_back(resolve(name));

  struct Row {
    Point location;
    double outcome;
    std::vector<double> covariates;
  };
  std::vector<Row> treatment_rows, control_rows;
  ValidationReport validation;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    ++validation.rows_read;
    const auto cell = [&](std::size_t c) -> const std::string& {
      if (c >= cells.size()) {
        throw InputError(config.units_csv + ": row " + std::to_string(r) +
                         " has too few columns");
      }
      return cells[c];
    };

    std::string label = config.treatment_label;
    if (has_region) {
      label = cell(col_region);
    }
    if (label != config.treatment_label && label != config.control_label) {
      throw InputError(config.units_csv + ": row " + std::to_string(r) + ": region label '" +
                       label + "' is neither '" + config.treatment_label + "' nor '" +
                       config.control_label + "'");
    }

    Row row;
    bool valid = true;
    const auto parse = [&](std::size_t c) {
      try {
        const double v = std::stod(cell(c));
        if (!std::isfinite(v)) valid = false;
        return v;
      } catch (const std::exception&) {
        valid = false;
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    row.location = {parse(col_x), parse(col_y)};
    row.outcome = parse(col_outcome);
    for (const std::size_t c : col_covariates) row.covariates.push_back(parse(c));
    if (valid && config.log_transform) {
      if (row.outcome <= 0.0) {
        valid = false;
      } else {
        row.outcome = std::log(row.outcome);
      }
    }
    if (!valid) {
      ++validation.rows_dropped;
      validation.dropped_rows.push_back(static_cast<int>(r));
      continue;
    }
    (label == config.treatment_label ? treatment_rows : control_rows).push_back(std::move(row));
  }

  const auto build = [&](const std::vector<Row>& src, const std::string& label) {
    if (src.empty()) {
      throw InputError(config.units_csv + ": region '" + label + "' has no valid rows");
    }
    RegionData region;
    region.label = label;
    const Eigen::Index n = static_cast<Eigen::Index>(src.size());
    const Eigen::Index p = static_cast<Eigen::Index>(col_covariates.size());
    region.locations.resize(n, 2);
    region.outcomes.resize(n);
    region.covariates.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = src[static_cast<std::size_t>(i)];
      region.locations(i, 0) = row.location.x;
      region.locations(i, 1) = row.location.y;
      region.outcomes[i] = row.outcome;
      for (Eigen::Index c = 0; c < p; ++c) {
        region.covariates(i, c) = row.covariates[static_cast<std::size_t>(c)];
      }
    }
    return region;
  };

  LoadedData out{build(treatment_rows, config.treatment_label),
                 build(control_rows, config.control_label),
                 load_border_file(resolve_path(config.base_dir, config.border_file)),
                 {},
                 validation};
  if (!config.region_polygons_file.empty()) {
    out.polygons = load_polygons_file(resolve_path(config.base_dir, config.region_polygons_file));
  }
  return out;
}

}  // namespace geordd
