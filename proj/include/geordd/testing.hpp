#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geordd/cliff.hpp"
#include "geordd/late.hpp"
#include "geordd/linalg.hpp"

namespace geordd {

/// The null model: a single Gaussian process spanning both regions, smooth and
/// continuous at the border, with a shared mean. Its joint covariance has the
/// Sigma_TT / Sigma_CC blocks on the diagonal and K_TC off the diagonal; the
/// Cholesky factor is cached for repeated sampling.
class NullModel {
 public:
  NullModel(const RegionData& data_t, const RegionData& data_c, const Hyperparams& theta);

  const Eigen::MatrixXd& joint_cov() const { return joint_cov_; }
  const CholFactor& factor() const { return factor_; }
  Eigen::Index treatment_count() const { return n_t_; }
  Eigen::Index size() const { return joint_cov_.rows(); }

  /// One draw of the stacked [Y_T; Y_C] under the null, from its own stream.
  Eigen::VectorXd sample(std::uint64_t seed) const;

 private:
  Eigen::MatrixXd joint_cov_;
  CholFactor factor_;
  Eigen::Index n_t_;
};

enum class TestMethod { kInvAnalytic, kInvBootstrap, kMllBootstrap, kChi2Bootstrap };
enum class BootstrapStatistic { kInv, kMll, kChi2 };

std::string method_name(TestMethod method);

struct NullSummary {
  double mean = 0.0;
  double sd = 0.0;
};

struct TestResult {
  TestMethod method = TestMethod::kInvAnalytic;
  double statistic = 0.0;
  double p_value = 1.0;
  int bootstrap_draws = 0;  // 0 for the analytic test
  std::uint64_t seed = 0;
  NullSummary null_summary;
};

/// Variance of the weighted-LATE posterior mean under the null model, for a
/// fixed weight vector on the border points.
double null_statistic_variance(const RegionData& data_t, const RegionData& data_c,
                               std::span<const Point> border_points, const Hyperparams& theta,
                               const Eigen::VectorXd& weights);

/// Analytically calibrated inverse-variance test: the statistic is normal with
/// mean zero under the null, so p = 2 Phi(-|stat| / sd_null).
TestResult test_inv_analytic(const RegionData& data_t, const RegionData& data_c,
                             std::span<const Point> border_points, const Hyperparams& theta);

struct BootstrapOptions {
  int draws = 10000;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

/// Parametric bootstrap under the null with theta held fixed and the null
/// Cholesky factor reused across draws. p-values use the add-one rule
/// (1 + k) / (B + 1): two-sided in |stat| for INV, upper tail for MLL and CHI2.
TestResult test_bootstrap(const RegionData& data_t, const RegionData& data_c,
                          std::span<const Point> border_points, const Hyperparams& theta,
                          BootstrapStatistic statistic, const BootstrapOptions& options);

/// log Pr(Y | two independent GPs) - log Pr(Y | single spanning GP), same
/// theta on both sides, no refitting.
double mll_statistic(const RegionData& data_t, const RegionData& data_c,
                     const Hyperparams& theta);

/// S^2 = mu' Sigma^-1 mu of a cliff posterior, via Cholesky solve.
double chi2_statistic(const CliffPosterior& cliff);

/// Uncalibrated posterior pseudo-p-value 2 Phi(-|mean|/sd); kept for the power
/// comparison, not a valid frequentist test.
double pseudo_p_value(const LateResult& late);

struct PlaceboResult {
  double angle_deg = 0.0;
  double p_value = 1.0;
  bool ok = false;
  std::string error;
};

struct PlaceboSuite {
  std::vector<PlaceboResult> results;
  std::array<int, 10> histogram{};  // counts of successful p-values per decile
  std::string note;
};

/// Splits a single region in half along a line at each angle, treats the two
/// halves as pseudo treatment/control with the line as border, and runs the
/// chosen calibrated test. Failed angles are recorded, not fatal.
PlaceboSuite placebo_suite(const RegionData& region, const Hyperparams& theta,
                           const std::vector<double>& angles_deg, TestMethod method,
                           const BootstrapOptions& options, int sentinel_count);

/// Default placebo angle grid: 1..180 degrees in steps of 1.
std::vector<double> default_placebo_angles();

}  // namespace geordd
