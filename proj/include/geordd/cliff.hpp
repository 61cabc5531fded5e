#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "geordd/data.hpp"
#include "geordd/geometry.hpp"
#include "geordd/gp.hpp"

namespace geordd {

/// Multivariate-normal posterior of the treatment effect at border points:
/// the pointwise difference between the two extrapolated surfaces.
struct CliffPosterior {
  std::vector<Point> points;  // sentinels, or projected unit/grid locations
  Eigen::VectorXd mean;       // R-vector
  Eigen::MatrixXd cov;        // R x R

  Eigen::Index count() const { return mean.size(); }
};

/// Two independent conditionings (one per region); mean is the difference and
/// covariance the sum. Requires covariate-free data (or pre-residualized
/// outcomes).
CliffPosterior cliff_posterior(const RegionData& data_t, const RegionData& data_c,
                               std::span<const Point> border_points, const Hyperparams& theta);

/// Joint path: the covariate ridge term sigma_beta^2 D D' couples the regions,
/// so a single (n_T + n_C) conditioning replaces the two independent ones.
CliffPosterior cliff_posterior_with_covariates(const RegionData& data_t,
                                               const RegionData& data_c,
                                               std::span<const Point> border_points,
                                               const Hyperparams& theta);

struct BetaEstimate {
  Eigen::VectorXd beta;                         // posterior mean of the coefficients
  std::vector<Eigen::VectorXd> residuals;       // per region, Y - D beta_hat
  std::vector<RegionData> residualized_regions; // inputs with residual outcomes, no covariates
};

/// Posterior mean of the linear coefficients across all regions stacked;
/// region GPs are independent so cov(Y | beta) is blockdiagonal.
BetaEstimate estimate_beta(const std::vector<RegionData>& regions, const Hyperparams& theta);

}  // namespace geordd
