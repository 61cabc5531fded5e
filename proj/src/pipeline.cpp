#include "geordd/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "geordd/rng.hpp"

namespace geordd {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kZ95 = 1.959964;

[[noreturn]] void stage_error(const std::string& stage, const Error& e) {
  throw Error("stage " + stage + ": " + e.what());
}

nlohmann::json hyperparams_json(const Hyperparams& theta) {
  return {{"lengthscale", theta.lengthscale},
          {"gp_scale", theta.gp_scale},
          {"noise", theta.noise},
          {"mean_scale", theta.mean_scale},
          {"beta_scale", theta.beta_scale}};
}

}  // namespace

AnalysisReport run_pipeline(const AnalysisConfig& config) {
  AnalysisReport report;
  report.version = kVersion;
  report.config_hash = config_hash(config);

  std::uint64_t seed = config.seed;
  if (!config.seed_set) {
    if (const char* env = std::getenv("GEORDD_SEED")) {
      seed = std::strtoull(env, nullptr, 10);
    } else {
      const bool stochastic =
          !config.hyperparams.has_value() || config.placebo ||
          std::any_of(config.tests.begin(), config.tests.end(),
                      [](TestMethod m) { return m != TestMethod::kInvAnalytic; });
      if (stochastic) {
        throw InputError("a seed is required (config \"seed\" or GEORDD_SEED) because a "
                         "stochastic stage was requested");
      }
    }
  }
  report.seed = seed;

  LoadedData data = [&] {
    try {
      return load_dataset(config);
    } catch (const Error& e) {
      stage_error("load", e);
    }
  }();
  report.validation = data.validation;

  // Hyperparameters: fixed from config, or empirical Bayes fit.
  try {
    if (config.hyperparams) {
      report.hyperparams = *config.hyperparams;
      report.hyperparams.validate();
    } else {
      FitOptions options;
      options.seed = derive_seed(seed, 0xf17);
      Hyperparams init = config.fit_init;
      if (data.treatment.covariate_count() > 0 && init.beta_scale == 0.0) {
        init.beta_scale = 1.0;
      }
      report.hyperparams =
          fit_hyperparams({data.treatment, data.control}, init, options);
      report.hyperparams_fitted = true;
    }
  } catch (const Error& e) {
    stage_error("fit", e);
  }
  const Hyperparams& theta = report.hyperparams;
  const double delta = config.delta.value_or(2.0 * theta.lengthscale);
  const double grid_spacing = config.grid_spacing.value_or(theta.lengthscale / 5.0);
  const double kde_bandwidth = config.kde_bandwidth.value_or(theta.lengthscale);

  // Covariates: residualization is the default path; the joint estimator is
  // kept behind a flag for validation.
  RegionData data_t = data.treatment;
  RegionData data_c = data.control;
  const bool has_covariates = data_t.covariate_count() > 0;
  const bool joint_path = has_covariates && config.joint_covariate_path;
  if (has_covariates && !joint_path) {
    try {
      BetaEstimate est = estimate_beta({data_t, data_c}, theta);
      report.beta = est.beta;
      data_t = std::move(est.residualized_regions[0]);
      data_c = std::move(est.residualized_regions[1]);
    } catch (const Error& e) {
      stage_error("residualize", e);
    }
  }

  try {
    report.sentinels = place_sentinels(data.border, config.sentinel_count);
    for (int i = 0; i < report.sentinels.count(); ++i) {
      report.sentinel_arclength.push_back((i + 0.5) * report.sentinels.spacing);
    }
    report.cliff = joint_path
                       ? cliff_posterior_with_covariates(data_t, data_c,
                                                         report.sentinels.points, theta)
                       : cliff_posterior(data_t, data_c, report.sentinels.points, theta);
    report.include_full_covariance = config.write_full_covariance;
  } catch (const Error& e) {
    stage_error("cliff", e);
  }

  // LATE table in the configured order. The density for RHO/POP is a KDE over
  // all unit locations with bandwidth defaulting to the lengthscale.
  try {
    std::vector<Point> all_units;
    for (const auto* region : {&data_t, &data_c}) {
      for (Eigen::Index i = 0; i < region->size(); ++i) {
        all_units.push_back(region->location(i));
      }
    }
    for (const WeightScheme scheme : config.schemes) {
      switch (scheme) {
        case WeightScheme::kUniform:
          report.late.push_back(late_uniform(report.cliff));
          break;
        case WeightScheme::kDensity: {
          const Eigen::VectorXd rho =
              kde_density(all_units, report.sentinels.points, kde_bandwidth);
          report.late.push_back(late_density_weighted(report.cliff, rho));
          break;
        }
        case WeightScheme::kInverseVariance:
          report.late.push_back(late_inverse_variance(report.cliff));
          break;
        case WeightScheme::kProjected:
          report.late.push_back(late_projected(data_t, data_c, data.border, delta, theta));
          break;
        case WeightScheme::kGeo:
        case WeightScheme::kPop: {
          if (data.polygons.empty()) {
            throw InputError("scheme " + scheme_name(scheme) +
                             " needs region polygons in the config");
          }
          if (scheme == WeightScheme::kGeo) {
            report.late.push_back(late_projected_grid(data_t, data_c, data.border,
                                                      data.polygons, delta, grid_spacing,
                                                      theta, nullptr));
          } else {
            const std::function<double(const Point&)> density =
                [&all_units, kde_bandwidth](const Point& p) {
                  const std::array<Point, 1> eval{p};
                  return kde_density(all_units, eval, kde_bandwidth)[0];
                };
            report.late.push_back(late_projected_grid(data_t, data_c, data.border,
                                                      data.polygons, delta, grid_spacing,
                                                      theta, &density));
          }
          break;
        }
        case WeightScheme::kCustom:
          throw InputError("CUSTOM is not a pipeline scheme");
      }
      // Induced unit weights for the schemes defined on the sentinel set.
      LateResult& result = report.late.back();
      if (scheme == WeightScheme::kUniform || scheme == WeightScheme::kDensity ||
          scheme == WeightScheme::kInverseVariance) {
        const UnitWeights weights =
            unit_weights(data_t, data_c, report.sentinels.points, theta,
                         {result.border_weights, scheme});
        result.unit_weights_t = weights.treatment;
        result.unit_weights_c = weights.control;
      }
    }
  } catch (const Error& e) {
    stage_error("late", e);
  }

  try {
    for (std::size_t i = 0; i < config.tests.size(); ++i) {
      const TestMethod method = config.tests[i];
      if (method == TestMethod::kInvAnalytic) {
        report.tests.push_back(
            test_inv_analytic(data_t, data_c, report.sentinels.points, theta));
      } else {
        const BootstrapStatistic stat = method == TestMethod::kInvBootstrap
                                            ? BootstrapStatistic::kInv
                                        : method == TestMethod::kMllBootstrap
                                            ? BootstrapStatistic::kMll
                                            : BootstrapStatistic::kChi2;
        BootstrapOptions options;
        options.draws = config.bootstrap_draws;
        options.threads = config.threads;
        options.seed = derive_seed(seed, 0x7e570000 + i);
        report.tests.push_back(
            test_bootstrap(data_t, data_c, report.sentinels.points, theta, stat, options));
      }
    }
  } catch (const Error& e) {
    stage_error("test", e);
  }

  if (config.placebo) {
    try {
      const std::vector<double> angles =
          config.placebo_angles.empty() ? default_placebo_angles() : config.placebo_angles;
      BootstrapOptions options;
      options.draws = config.bootstrap_draws;
      options.threads = config.threads;
      options.seed = derive_seed(seed, 0x91aceb0);
      const TestMethod method = config.tests.empty() ? TestMethod::kInvAnalytic
                                                     : config.tests.front();
      // The suite runs within each observed region separately; merge results.
      PlaceboSuite suite;
      for (const auto* region : {&data_t, &data_c}) {
        PlaceboSuite part =
            placebo_suite(*region, theta, angles, method, options, config.sentinel_count);
        suite.note = part.note;
        for (std::size_t b = 0; b < suite.histogram.size(); ++b) {
          suite.histogram[b] += part.histogram[b];
        }
        suite.results.insert(suite.results.end(), part.results.begin(), part.results.end());
      }
      report.placebo = std::move(suite);
    } catch (const Error& e) {
      stage_error("placebo", e);
    }
  }
  return report;
}

nlohmann::json AnalysisReport::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["provenance"] = {{"config_hash", config_hash}, {"seed", seed}, {"version", version}};
  j["hyperparams"] = hyperparams_json(hyperparams);
  j["hyperparams_fitted"] = hyperparams_fitted;
  if (beta.size() > 0) {
    j["beta"] = std::vector<double>(beta.begin(), beta.end());
  }

  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cliff.count(); ++i) {
    const double sd = std::sqrt(cliff.cov(i, i));
    rows.push_back({{"index", i},
                    {"arc_length", sentinel_arclength[static_cast<std::size_t>(i)]},
                    {"x", cliff.points[static_cast<std::size_t>(i)].x},
                    {"y", cliff.points[static_cast<std::size_t>(i)].y},
                    {"mean", cliff.mean[i]},
                    {"sd", sd},
                    {"lo95", cliff.mean[i] - kZ95 * sd},
                    {"hi95", cliff.mean[i] + kZ95 * sd}});
  }
  j["sentinels"] = {{"count", sentinels.count()}, {"spacing", sentinels.spacing},
                    {"rows", rows}};
  if (include_full_covariance) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cliff.cov.rows(); ++i) {
      cov.push_back(std::vector<double>(cliff.cov.row(i).begin(), cliff.cov.row(i).end()));
    }
    j["cliff_covariance"] = cov;
  }

  nlohmann::json late_rows = nlohmann::json::array();
  for (const auto& result : late) {
    nlohmann::json row = {{"scheme", scheme_name(result.scheme)},
                          {"mean", result.mean},
                          {"sd", result.sd()},
                          {"variance", result.variance},
                          {"tail_prob", result.tail_prob}};
    if (result.unit_weights_t.size() > 0) {
      row["unit_weights_t"] =
          std::vector<double>(result.unit_weights_t.begin(), result.unit_weights_t.end());
      row["unit_weights_c"] =
          std::vector<double>(result.unit_weights_c.begin(), result.unit_weights_c.end());
    }
    late_rows.push_back(std::move(row));
  }
  j["late"] = late_rows;

  nlohmann::json test_rows = nlohmann::json::array();
  for (const auto& result : tests) {
    test_rows.push_back({{"method", method_name(result.method)},
                         {"statistic", result.statistic},
                         {"p_value", result.p_value},
                         {"b", result.bootstrap_draws},
                         {"seed", result.seed},
                         {"null_mean", result.null_summary.mean},
                         {"null_sd", result.null_summary.sd}});
  }
  j["tests"] = test_rows;

  if (placebo) {
    nlohmann::json angle_rows = nlohmann::json::array();
    for (const auto& row : placebo->results) {
      angle_rows.push_back({{"angle", row.angle_deg},
                            {"p_value", row.ok ? nlohmann::json(row.p_value) : nlohmann::json()},
                            {"ok", row.ok},
                            {"error", row.error}});
    }
    j["placebo"] = {{"results", angle_rows},
                    {"histogram", placebo->histogram},
                    {"note", placebo->note}};
  }

  j["validation"] = {{"rows_read", validation.rows_read},
                     {"rows_dropped", validation.rows_dropped},
                     {"dropped_rows", validation.dropped_rows}};
  return j;
}

std::string AnalysisReport::sentinel_table_csv() const {
  std::ostringstream out;
  out << "index,arc_length,x,y,mean,sd,lo95,hi95\n";
  for (Eigen::Index i = 0; i < cliff.count(); ++i) {
    const double sd = std::sqrt(cliff.cov(i, i));
    out << i << ',' << format_double(sentinel_arclength[static_cast<std::size_t>(i)]) << ','
        << format_double(cliff.points[static_cast<std::size_t>(i)].x) << ','
        << format_double(cliff.points[static_cast<std::size_t>(i)].y) << ','
        << format_double(cliff.mean[i]) << ',' << format_double(sd) << ','
        << format_double(cliff.mean[i] - kZ95 * sd) << ','
        << format_double(cliff.mean[i] + kZ95 * sd) << '\n';
  }
  return out.str();
}

std::string AnalysisReport::late_table_csv() const {
  std::ostringstream out;
  out << "scheme,mean,sd,tail_prob\n";
  for (const auto& result : late) {
    out << scheme_name(result.scheme) << ',' << format_double(result.mean) << ','
        << format_double(result.sd()) << ',' << format_double(result.tail_prob) << '\n';
  }
  return out.str();
}

std::string AnalysisReport::placebo_csv() const {
  std::ostringstream out;
  out << "angle,p_value\n";
  if (placebo) {
    for (const auto& row : placebo->results) {
      if (!row.ok) continue;
      out << format_double(row.angle_deg) << ',' << format_double(row.p_value) << '\n';
    }
  }
  return out.str();
}

}  // namespace geordd
