#include "geordd/cliff.hpp"

#include "geordd/linalg.hpp"

namespace geordd {

CliffPosterior cliff_posterior(const RegionData& data_t, const RegionData& data_c,
                               std::span<const Point> border_points, const Hyperparams& theta) {
  const CovMatrices cov = assemble_covariances(data_t, data_c, border_points, theta);
  const MvnPosterior side_t = mvn_condition(cov.sigma_tt, cov.k_bt, cov.k_bb, data_t.outcomes);
  const MvnPosterior side_c = mvn_condition(cov.sigma_cc, cov.k_bc, cov.k_bb, data_c.outcomes);
  CliffPosterior out;
  out.points.assign(border_points.begin(), border_points.end());
  out.mean = side_t.mean - side_c.mean;
  out.cov = side_t.cov + side_c.cov;
  return out;
}

CliffPosterior cliff_posterior_with_covariates(const RegionData& data_t,
                                               const RegionData& data_c,
                                               std::span<const Point> border_points,
                                               const Hyperparams& theta) {
  if (data_t.covariate_count() != data_c.covariate_count()) {
    throw InputError("cliff_posterior_with_covariates: regions carry " +
                     std::to_string(data_t.covariate_count()) + " vs " +
                     std::to_string(data_c.covariate_count()) + " covariate columns");
  }
  const CovMatrices cov = assemble_covariances(data_t, data_c, border_points, theta);
  const Eigen::Index n_t = data_t.size(), n_c = data_c.size();
  const Eigen::Index n = n_t + n_c;
  const Eigen::Index p = data_t.covariate_count();

  Eigen::MatrixXd sigma_y = Eigen::MatrixXd::Zero(n, n);
  sigma_y.topLeftCorner(n_t, n_t) = cov.sigma_tt;
  sigma_y.bottomRightCorner(n_c, n_c) = cov.sigma_cc;
  if (p > 0 && theta.beta_scale > 0.0) {
    Eigen::MatrixXd d(n, p);
    d.topRows(n_t) = data_t.covariates;
    d.bottomRows(n_c) = data_c.covariates;
    sigma_y.noalias() += (theta.beta_scale * theta.beta_scale) * d * d.transpose();
  }

  Eigen::MatrixXd cross(border_points.size(), n);
  cross.leftCols(n_t) = cov.k_bt;
  cross.rightCols(n_c) = -cov.k_bc;

  Eigen::VectorXd y(n);
  y.head(n_t) = data_t.outcomes;
  y.tail(n_c) = data_c.outcomes;

  const MvnPosterior post = mvn_condition(sigma_y, cross, 2.0 * cov.k_bb, y);
  CliffPosterior out;
  out.points.assign(border_points.begin(), border_points.end());
  out.mean = post.mean;
  out.cov = post.cov;
  return out;
}

BetaEstimate estimate_beta(const std::vector<RegionData>& regions, const Hyperparams& theta) {
  theta.validate();
  if (regions.empty()) throw InputError("estimate_beta: no regions");
  const Eigen::Index p = regions.front().covariate_count();
  if (p == 0) throw InputError("estimate_beta: no covariates present");
  Eigen::Index n = 0;
  for (const auto& region : regions) {
    region.validate();
    if (region.covariate_count() != p) {
      throw InputError("estimate_beta: regions disagree on covariate count");
    }
    n += region.size();
  }

  const double m2 = theta.mean_scale * theta.mean_scale;
  const double e2 = theta.noise * theta.noise;
  const double b2 = theta.beta_scale * theta.beta_scale;

  Eigen::MatrixXd sigma_y = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd d(n, p);
  Eigen::VectorXd y(n);
  Eigen::Index at = 0;
  for (const auto& region : regions) {
    const Eigen::Index m = region.size();
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        sigma_y(at + i, at + j) = m2 + sqexp_kernel(region.location(i), region.location(j), theta);
      }
      sigma_y(at + i, at + i) += e2;
    }
    d.middleRows(at, m) = region.covariates;
    y.segment(at, m) = region.outcomes;
    at += m;
  }
  sigma_y.noalias() += b2 * d * d.transpose();

  BetaEstimate out;
  if (b2 == 0.0) {
    out.beta = Eigen::VectorXd::Zero(p);
  } else {
    const CholFactor factor = cholesky_with_jitter(sigma_y);
    out.beta = b2 * d.transpose() * factor.solve(y);
  }

  at = 0;
  for (const auto& region : regions) {
    const Eigen::Index m = region.size();
    Eigen::VectorXd resid = region.outcomes - region.covariates * out.beta;
    RegionData stripped = region;
    stripped.outcomes = resid;
    stripped.covariates.resize(m, 0);
    out.residuals.push_back(std::move(resid));
    out.residualized_regions.push_back(std::move(stripped));
    at += m;
  }
  return out;
}

}  // namespace geordd
