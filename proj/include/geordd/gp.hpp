#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "geordd/data.hpp"
#include "geordd/geometry.hpp"
#include "geordd/linalg.hpp"

namespace geordd {

/// Kernel and noise scales governing all covariances. Optimized on log scale;
/// mean_scale is held fixed during fitting (default 20 outcome units).
struct Hyperparams {
  double lengthscale = 1.0;   // ell
  double gp_scale = 1.0;      // sigma_GP
  double noise = 0.1;         // sigma_eps
  double mean_scale = 20.0;   // sigma_m
  double beta_scale = 0.0;    // sigma_beta; 0 when no covariates

  void validate() const;
};

/// sigma_GP^2 * exp(-|s - s'|^2 / (2 ell^2))
inline double sqexp_kernel(const Point& a, const Point& b, const Hyperparams& theta) {
  const double d2 = squared_norm(a - b);
  return theta.gp_scale * theta.gp_scale *
         std::exp(-d2 / (2.0 * theta.lengthscale * theta.lengthscale));
}

/// Covariance blocks between outcomes and the noise-free surfaces at border
/// points. K-blocks carry the sigma_m^2 mean term; the Sigma blocks add
/// sigma_eps^2 on the diagonal. k_tc (shared single-surface cross covariance
/// under the null model) carries sigma_m^2 but no noise.
struct CovMatrices {
  Eigen::MatrixXd sigma_tt;  // n_T x n_T, noise-inclusive
  Eigen::MatrixXd sigma_cc;  // n_C x n_C, noise-inclusive
  Eigen::MatrixXd k_bt;      // R x n_T
  Eigen::MatrixXd k_bc;      // R x n_C
  Eigen::MatrixXd k_bb;      // R x R
  Eigen::MatrixXd k_tc;      // n_T x n_C
};

CovMatrices assemble_covariances(const RegionData& data_t, const RegionData& data_c,
                                 std::span<const Point> border_points,
                                 const Hyperparams& theta);

struct MvnPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Mean-zero joint [y; targets] with obs covariance A, cross covariance C
/// (targets x obs) and target covariance B, conditioned on y. Cholesky of A
/// only; the posterior covariance is symmetrized.
MvnPosterior mvn_condition(const Eigen::MatrixXd& obs_cov, const Eigen::MatrixXd& cross_cov,
                           const Eigen::MatrixXd& target_cov, const Eigen::VectorXd& y);

/// -1/2 y' S^-1 y - 1/2 log|S| - n/2 log(2 pi), via Cholesky.
double log_marginal_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov);

struct FitOptions {
  int restarts = 5;          // random restarts around the initial point
  double restart_spread = 1.0;  // +- log-units of perturbation
  int max_iterations = 400;  // simplex iterations per start
  double tolerance = 1e-8;   // relative simplex spread in objective
  std::uint64_t seed = 0;    // restart perturbations
};

/// Empirical Bayes fit: maximizes the summed log marginal likelihood of the
/// regions over log(ell), log(sigma_GP), log(sigma_eps) — and log(sigma_beta)
/// when covariates are present, in which case the regions share one joint
/// likelihood through the covariate term. sigma_m stays fixed.
Hyperparams fit_hyperparams(const std::vector<RegionData>& regions, const Hyperparams& init,
                            const FitOptions& options = {});

/// Objective used by fit_hyperparams (exposed for tests): total log marginal
/// likelihood of the regions at theta.
double regions_log_marginal_likelihood(const std::vector<RegionData>& regions,
                                       const Hyperparams& theta);

/// Generic Nelder-Mead maximizer in R^d (derivative-free simplex search).
struct SimplexResult {
  Eigen::VectorXd argmax;
  double value;
  int iterations;
};
SimplexResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& start, double step,
                                   int max_iterations, double tolerance);

}  // namespace geordd
