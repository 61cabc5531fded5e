#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geordd/data.hpp"
#include "geordd/geometry.hpp"
#include "geordd/gp.hpp"
#include "geordd/late.hpp"

namespace geordd {

/// Projected 1D RDD baseline: local linear regression of outcomes on signed
/// border distance with a triangular kernel, intercepts extrapolated to zero.
struct Rdd1dResult {
  double estimate = 0.0;
  Eigen::VectorXd weights_t;  // estimate = weights_t'Y_T + weights_c'Y_C
  Eigen::VectorXd weights_c;
};

Rdd1dResult projected_1d_rdd(const RegionData& data_t, const RegionData& data_c,
                             const Border& border, double bandwidth);

/// Spatial-confounding study: outcomes follow a linear trend parallel to the
/// border, density differs across quadrants, the treatment effect is zero.
/// The projected 1D RDD converges to -alpha/3; the GP estimator does not.
struct ConfoundingConfig {
  double alpha = 3.0;
  double rho0 = 1.0;  // absolute density scale; expected counts follow (2,1,2,1)*rho0
  int n = 20000;
  double noise = 0.1;
  std::uint64_t seed = 0;
  double bandwidth = 0.1;        // 1D baseline kernel bandwidth
  int fit_max_units = 500;       // subsample cap for hyperparameter fitting
  int geordd_max_units = 3000;   // subsample cap for the GP estimate
  int sentinel_count = 100;
};

struct ConfoundingResult {
  double projected_1d_estimate = 0.0;
  double geordd_inv_estimate = 0.0;
  Hyperparams fitted;
  int n_treatment = 0;
  int n_control = 0;
};

ConfoundingResult sim_confounding(const ConfoundingConfig& config);

/// Wiggly-border study: three blocks with densities (1, 0.3, 2), treatment
/// effect tau(s) = s1 above the border, triangular-wave border in the left
/// block. One fixed draw of locations; outcomes redrawn per simulation with
/// known hyperparameters.
struct WigglyScenario {
  int n_wiggles = 0;
  double amplitude = 0.01;
  std::array<double, 3> block_density{1.0, 0.3, 2.0};
  double lengthscale = 0.4;
  double gp_scale = 0.5;
  double noise = 0.1;
  double mean_scale = 20.0;
  int n_units = 200;
  int sentinel_count = 100;
  double grid_spacing = 0.08;  // lengthscale / 5
};

struct WigglyRow {
  WeightScheme scheme = WeightScheme::kUniform;
  int n_wiggles = 0;
  double mean_estimate = 0.0;
  double mean_posterior_sd = 0.0;
  double estimand = 0.0;
};

/// Triangular-wave border: wave on s1 < 0.5 (zero-mean, continuous at the
/// block boundary), straight to (2, 0) afterwards.
Border wiggly_border(int n_wiggles, double amplitude);

/// Height of the wavy border at s1; treatment lies above it.
double wiggly_border_height(int n_wiggles, double amplitude, double s1);

std::vector<WigglyRow> sim_wiggly(const WigglyScenario& scenario, int n_sims,
                                  std::uint64_t seed);

/// Two jittered unit lattices facing each other across a straight border;
/// stands in for the paper's unpublished county-centroid layout.
struct PowerLayout {
  RegionData units_t;  // outcomes left zero; filled per simulation
  RegionData units_c;
  Border border{std::vector<Point>{{0.0, 0.0}, {0.0, 1.0}}};
};

PowerLayout lattice_layout(int rows, int cols, double spacing, double jitter,
                           std::uint64_t seed);

struct PowerConfig {
  double effect = 0.0;      // constant treatment effect added to the treatment side
  int n_sims = 1000;
  double alpha = 0.05;
  int bootstrap_draws = 500;
  int sentinel_count = 100;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct PowerRow {
  std::string test;
  int rejections = 0;
  int n_sims = 0;
  double rate = 0.0;
};

/// Rejection rates of the tests (MLL, CHI2, uncalibrated INV, calibrated INV
/// analytic and bootstrap) on single-GP outcomes plus a constant effect on
/// the treatment side.
std::vector<PowerRow> sim_power(const PowerLayout& layout, const Hyperparams& theta,
                                const PowerConfig& config);

}  // namespace geordd
