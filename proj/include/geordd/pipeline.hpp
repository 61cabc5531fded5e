#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geordd/cliff.hpp"
#include "geordd/io.hpp"
#include "geordd/late.hpp"
#include "geordd/testing.hpp"

namespace geordd {

struct AnalysisReport {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  Hyperparams hyperparams;
  bool hyperparams_fitted = false;
  Eigen::VectorXd beta;  // empty when no covariates
  SentinelSet sentinels;
  std::vector<double> sentinel_arclength;
  CliffPosterior cliff;
  bool include_full_covariance = false;
  std::vector<LateResult> late;
  std::vector<TestResult> tests;
  std::optional<PlaceboSuite> placebo;
  ValidationReport validation;

  nlohmann::json to_json() const;

  /// index,arc_length,x,y,mean,sd,lo95,hi95 with 17 significant digits.
  std::string sentinel_table_csv() const;
  /// scheme,mean,sd,tail_prob
  std::string late_table_csv() const;
  /// angle,p_value
  std::string placebo_csv() const;
};

/// fit (unless theta is given) -> residualize covariates -> cliff -> LATEs ->
/// tests -> placebo, deterministic given the seed. Stage failures surface as
/// errors tagged with the stage name.
AnalysisReport run_pipeline(const AnalysisConfig& config);

}  // namespace geordd
