// Command-line front end: fit, cliff, late, test, placebo, run, and the three
// simulation studies. Configuration comes from a JSON file plus flag
// overrides; a seed is mandatory for any stochastic stage (GEORDD_SEED works
// as a fallback).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geordd/baselines.hpp"
#include "geordd/io.hpp"
#include "geordd/pipeline.hpp"

namespace {

using geordd::AnalysisConfig;
using geordd::format_double;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw geordd::InputError("cannot write " + path);
  out << content;
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> sentinel_count;
  std::optional<int> bootstrap_draws;
  std::optional<int> threads;
  std::string output = "-";

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON config file")->required();
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--sentinels", sentinel_count, "override sentinel count");
    cmd->add_option("--bootstrap-draws", bootstrap_draws, "override bootstrap draw count");
    cmd->add_option("--threads", threads, "bootstrap/simulation threads (0 = auto)");
    cmd->add_option("-o,--output", output, "output file for the JSON report ('-' = stdout)");
  }

  AnalysisConfig load() const {
    AnalysisConfig config = geordd::load_config_file(config_path);
    if (seed) {
      config.seed = *seed;
      config.seed_set = true;
    }
    if (sentinel_count) config.sentinel_count = *sentinel_count;
    if (bootstrap_draws) config.bootstrap_draws = *bootstrap_draws;
    if (threads) config.threads = *threads;
    return config;
  }

  void emit(const nlohmann::json& j) const {
    const std::string text = j.dump(2) + "\n";
    if (output == "-") {
      std::cout << text;
    } else {
      write_file(output, text);
    }
  }
};

nlohmann::json hyperparams_json(const geordd::Hyperparams& theta) {
  return {{"lengthscale", theta.lengthscale},
          {"gp_scale", theta.gp_scale},
          {"noise", theta.noise},
          {"mean_scale", theta.mean_scale},
          {"beta_scale", theta.beta_scale}};
}

int run_report_command(const CommonArgs& args, AnalysisConfig config,
                       const std::string& sentinel_csv, const std::string& late_csv,
                       const std::string& placebo_csv) {
  const geordd::AnalysisReport report = geordd::run_pipeline(config);
  if (!sentinel_csv.empty()) write_file(sentinel_csv, report.sentinel_table_csv());
  if (!late_csv.empty()) write_file(late_csv, report.late_table_csv());
  if (!placebo_csv.empty()) write_file(placebo_csv, report.placebo_csv());
  args.emit(report.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process analysis of geographic regression discontinuities"};
  app.require_subcommand(1);

  CommonArgs fit_args, cliff_args, late_args, test_args, placebo_args, run_args;
  std::string cliff_csv, late_csv, placebo_csv;

  auto* fit_cmd = app.add_subcommand("fit", "fit hyperparameters by marginal likelihood");
  fit_args.attach(fit_cmd);

  auto* cliff_cmd = app.add_subcommand("cliff", "cliff-height posterior at the sentinels");
  cliff_args.attach(cliff_cmd);
  cliff_cmd->add_option("--sentinel-csv", cliff_csv, "write the sentinel table CSV here");

  auto* late_cmd = app.add_subcommand("late", "LATE estimates for the configured schemes");
  late_args.attach(late_cmd);
  late_cmd->add_option("--late-csv", late_csv, "write the LATE table CSV here");

  auto* test_cmd = app.add_subcommand("test", "hypothesis tests against zero effect");
  test_args.attach(test_cmd);

  auto* placebo_cmd = app.add_subcommand("placebo", "placebo tests over an angle grid");
  placebo_args.attach(placebo_cmd);
  placebo_cmd->add_option("--placebo-csv", placebo_csv, "write the angle/p-value CSV here");

  auto* run_cmd = app.add_subcommand("run", "full pipeline: fit, cliff, LATEs, tests");
  run_args.attach(run_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "simulation studies");
  sim_cmd->require_subcommand(1);

  // simulate confounding
  geordd::ConfoundingConfig confounding;
  std::string sim_output = "-";
  auto* conf_cmd = sim_cmd->add_subcommand("confounding", "spatial-confounding study");
  conf_cmd->add_option("--alpha", confounding.alpha, "trend slope");
  conf_cmd->add_option("--rho0", confounding.rho0, "density scale");
  conf_cmd->add_option("--n", confounding.n, "number of units");
  conf_cmd->add_option("--noise", confounding.noise, "outcome noise sd");
  conf_cmd->add_option("--bandwidth", confounding.bandwidth, "1D RDD bandwidth");
  conf_cmd->add_option("--seed", confounding.seed, "rng seed")->required();
  conf_cmd->add_option("-o,--output", sim_output, "output file ('-' = stdout)");

  // simulate wiggly
  geordd::WigglyScenario wiggly;
  std::vector<int> wiggle_grid{0, 1, 3, 10, 100, 1000};
  int wiggly_sims = 500;
  std::uint64_t wiggly_seed = 0;
  bool wiggly_seed_set = false;
  std::string wiggly_csv;
  auto* wiggly_cmd = sim_cmd->add_subcommand("wiggly", "wiggly-border LATE study");
  wiggly_cmd->add_option("--wiggles", wiggle_grid, "wiggle counts to sweep");
  wiggly_cmd->add_option("--amplitude", wiggly.amplitude, "triangular wave amplitude");
  wiggly_cmd->add_option("--n-sims", wiggly_sims, "outcome draws per scenario");
  wiggly_cmd->add_option("--seed", wiggly_seed, "rng seed")->required()
      ->each([&](const std::string&) { wiggly_seed_set = true; });
  wiggly_cmd->add_option("--csv", wiggly_csv, "write the results table CSV here");
  wiggly_cmd->add_option("-o,--output", sim_output, "output file ('-' = stdout)");

  // simulate power
  geordd::PowerConfig power;
  double power_spacing = 50.0, power_jitter = 12.0;
  int power_rows = 10, power_cols = 10;
  geordd::Hyperparams power_theta;
  power_theta.lengthscale = 100.0;
  power_theta.gp_scale = 1.0;
  power_theta.noise = 1.0;
  auto* power_cmd = sim_cmd->add_subcommand("power", "test power study on a lattice layout");
  power_cmd->add_option("--effect", power.effect, "constant treatment effect");
  power_cmd->add_option("--n-sims", power.n_sims, "number of replications");
  power_cmd->add_option("--alpha", power.alpha, "significance level");
  power_cmd->add_option("--bootstrap-draws", power.bootstrap_draws, "bootstrap draws per test");
  power_cmd->add_option("--rows", power_rows, "lattice rows per side");
  power_cmd->add_option("--cols", power_cols, "lattice columns per side");
  power_cmd->add_option("--spacing", power_spacing, "lattice spacing");
  power_cmd->add_option("--jitter", power_jitter, "uniform jitter half-width");
  power_cmd->add_option("--lengthscale", power_theta.lengthscale, "kernel lengthscale");
  power_cmd->add_option("--gp-scale", power_theta.gp_scale, "kernel scale");
  power_cmd->add_option("--noise", power_theta.noise, "noise sd");
  power_cmd->add_option("--threads", power.threads, "bootstrap threads");
  power_cmd->add_option("--seed", power.seed, "rng seed")->required();
  power_cmd->add_option("-o,--output", sim_output, "output file ('-' = stdout)");

  CLI11_PARSE(app, argc, argv);

  const auto emit = [&](const nlohmann::json& j) {
    const std::string text = j.dump(2) + "\n";
    if (sim_output == "-") {
      std::cout << text;
    } else {
      write_file(sim_output, text);
    }
  };

  try {
    if (fit_cmd->parsed()) {
      AnalysisConfig config = fit_args.load();
      config.hyperparams.reset();  // force a fit
      config.schemes.clear();
      config.tests.clear();
      config.placebo = false;
      const geordd::AnalysisReport report = geordd::run_pipeline(config);
      fit_args.emit({{"hyperparams", hyperparams_json(report.hyperparams)},
                     {"provenance",
                      {{"config_hash", report.config_hash}, {"seed", report.seed}}}});
      return 0;
    }
    if (cliff_cmd->parsed()) {
      AnalysisConfig config = cliff_args.load();
      config.schemes.clear();
      config.tests.clear();
      config.placebo = false;
      return run_report_command(cliff_args, config, cliff_csv, "", "");
    }
    if (late_cmd->parsed()) {
      AnalysisConfig config = late_args.load();
      if (config.schemes.empty()) {
        config.schemes = {geordd::WeightScheme::kUniform, geordd::WeightScheme::kDensity,
                          geordd::WeightScheme::kInverseVariance,
                          geordd::WeightScheme::kProjected};
      }
      config.tests.clear();
      config.placebo = false;
      return run_report_command(late_args, config, "", late_csv, "");
    }
    if (test_cmd->parsed()) {
      AnalysisConfig config = test_args.load();
      if (config.tests.empty()) config.tests = {geordd::TestMethod::kInvAnalytic};
      config.placebo = false;
      return run_report_command(test_args, config, "", "", "");
    }
    if (placebo_cmd->parsed()) {
      AnalysisConfig config = placebo_args.load();
      config.placebo = true;
      return run_report_command(placebo_args, config, "", "", placebo_csv);
    }
    if (run_cmd->parsed()) {
      return run_report_command(run_args, run_args.load(), "", "", "");
    }
    if (conf_cmd->parsed()) {
      const geordd::ConfoundingResult result = geordd::sim_confounding(confounding);
      emit({{"projected_1d_estimate", result.projected_1d_estimate},
            {"geordd_inv_estimate", result.geordd_inv_estimate},
            {"fitted_hyperparams", hyperparams_json(result.fitted)},
            {"n_treatment", result.n_treatment},
            {"n_control", result.n_control},
            {"metadata",
             {{"seed", confounding.seed},
              {"alpha", confounding.alpha},
              {"n", confounding.n},
              {"noise", confounding.noise},
              {"bandwidth", confounding.bandwidth}}}});
      return 0;
    }
    if (wiggly_cmd->parsed()) {
      (void)wiggly_seed_set;
      nlohmann::json rows = nlohmann::json::array();
      std::string csv = "scheme,n_wiggles,mean_estimate,mean_posterior_sd,estimand\n";
      for (const int w : wiggle_grid) {
        geordd::WigglyScenario scenario = wiggly;
        scenario.n_wiggles = w;
        for (const auto& row : geordd::sim_wiggly(scenario, wiggly_sims, wiggly_seed)) {
          rows.push_back({{"scheme", geordd::scheme_name(row.scheme)},
                          {"n_wiggles", row.n_wiggles},
                          {"mean_estimate", row.mean_estimate},
                          {"mean_posterior_sd", row.mean_posterior_sd},
                          {"estimand", row.estimand}});
          csv += geordd::scheme_name(row.scheme) + "," + std::to_string(row.n_wiggles) + "," +
                 format_double(row.mean_estimate) + "," +
                 format_double(row.mean_posterior_sd) + "," + format_double(row.estimand) +
                 "\n";
        }
      }
      if (!wiggly_csv.empty()) write_file(wiggly_csv, csv);
      emit({{"rows", rows},
            {"metadata",
             {{"seed", wiggly_seed},
              {"n_sims", wiggly_sims},
              {"amplitude", wiggly.amplitude},
              {"wiggle_grid", wiggle_grid}}}});
      return 0;
    }
    if (power_cmd->parsed()) {
      const geordd::PowerLayout layout = geordd::lattice_layout(
          power_rows, power_cols, power_spacing, power_jitter, power.seed);
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : geordd::sim_power(layout, power_theta, power)) {
        rows.push_back({{"test", row.test},
                        {"rejections", row.rejections},
                        {"n_sims", row.n_sims},
                        {"rate", row.rate}});
      }
      emit({{"rows", rows},
            {"metadata",
             {{"seed", power.seed},
              {"effect", power.effect},
              {"n_sims", power.n_sims},
              {"alpha", power.alpha},
              {"bootstrap_draws", power.bootstrap_draws},
              {"hyperparams", hyperparams_json(power_theta)}}}});
      return 0;
    }
  } catch (const geordd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
