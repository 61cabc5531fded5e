#include "geordd/late.hpp"

#include <cmath>

#include "geordd/linalg.hpp"
#include "geordd/rng.hpp"

namespace geordd {

std::string scheme_name(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::kUniform: return "UNIF";
    case WeightScheme::kDensity: return "RHO";
    case WeightScheme::kInverseVariance: return "INV";
    case WeightScheme::kProjected: return "PROJ";
    case WeightScheme::kGeo: return "GEO";
    case WeightScheme::kPop: return "POP";
    case WeightScheme::kCustom: return "CUSTOM";
  }
  return "CUSTOM";
}

LateResult weighted_late(const CliffPosterior& cliff, const BorderWeights& weights) {
  const Eigen::VectorXd& w = weights.values;
  if (w.size() != cliff.count()) {
    throw InputError("weighted_late: " + std::to_string(w.size()) + " weights for " +
                     std::to_string(cliff.count()) + " cliff points");
  }
  if (!w.allFinite()) throw InputError("weighted_late: non-finite weights");
  const double total = w.sum();
  if (total == 0.0) {
    throw InputError("weighted_late: weights sum to zero, normalization undefined");
  }
  LateResult out;
  out.scheme = weights.scheme;
  out.border_weights = w;
  out.mean = w.dot(cliff.mean) / total;
  out.variance = w.dot(cliff.cov * w) / (total * total);
  out.tail_prob = normal_cdf(out.mean / std::sqrt(out.variance));
  return out;
}

LateResult late_uniform(const CliffPosterior& cliff) {
  return weighted_late(cliff, {Eigen::VectorXd::Ones(cliff.count()), WeightScheme::kUniform});
}

LateResult late_inverse_variance(const CliffPosterior& cliff) {
  const CholFactor factor = cholesky_with_jitter(cliff.cov);
  const Eigen::VectorXd w = factor.solve(Eigen::VectorXd::Ones(cliff.count()));
  LateResult out = weighted_late(cliff, {w, WeightScheme::kInverseVariance});
  // w'Sigma w / (w'1)^2 reduces to 1/(1'Sigma^-1 1); recompute it that way to
  // avoid losing precision through the quadratic form.
  out.variance = 1.0 / w.sum();
  out.tail_prob = normal_cdf(out.mean / std::sqrt(out.variance));
  return out;
}

LateResult late_density_weighted(const CliffPosterior& cliff, const Eigen::VectorXd& density) {
  if (density.minCoeff() < 0.0) throw InputError("late_density_weighted: negative density");
  if (density.sum() <= 0.0) throw InputError("late_density_weighted: density is zero everywhere");
  return weighted_late(cliff, {density, WeightScheme::kDensity});
}

namespace {

std::vector<Point> project_all(const Eigen::Matrix<double, Eigen::Dynamic, 2>& locations,
                               const Border& border, double delta) {
  std::vector<Point> projected;
  for (Eigen::Index i = 0; i < locations.rows(); ++i) {
    const auto proj = border.project({locations(i, 0), locations(i, 1)});
    if (proj.distance <= delta) projected.push_back(proj.point);
  }
  return projected;
}

}  // namespace

LateResult late_projected(const RegionData& data_t, const RegionData& data_c,
                          const Border& border, double delta, const Hyperparams& theta) {
  std::vector<Point> projected = project_all(data_t.locations, border, delta);
  const std::vector<Point> from_control = project_all(data_c.locations, border, delta);
  projected.insert(projected.end(), from_control.begin(), from_control.end());
  if (projected.empty()) {
    throw InputError("late_projected: no units within " + std::to_string(delta) +
                     " of the border");
  }
  const CliffPosterior cliff = cliff_posterior(data_t, data_c, projected, theta);
  LateResult out = late_uniform(cliff);
  out.scheme = WeightScheme::kProjected;
  return out;
}

LateResult late_projected_grid(const RegionData& data_t, const RegionData& data_c,
                               const Border& border, const std::vector<Polygon>& regions,
                               double delta, double nu, const Hyperparams& theta,
                               const std::function<double(const Point&)>* density) {
  const BufferGrid grid = buffer_grid(regions, border, delta, nu);
  std::vector<Point> projected;
  projected.reserve(grid.points.size());
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.points.size()));
  for (std::size_t l = 0; l < grid.points.size(); ++l) {
    projected.push_back(border.project(grid.points[l]).point);
    w[static_cast<Eigen::Index>(l)] = density ? (*density)(grid.points[l]) : 1.0;
  }
  const CliffPosterior cliff = cliff_posterior(data_t, data_c, projected, theta);
  LateResult out = density
                       ? late_density_weighted(cliff, w)
                       : late_uniform(cliff);
  out.scheme = density ? WeightScheme::kPop : WeightScheme::kGeo;
  return out;
}

UnitWeights unit_weights(const RegionData& data_t, const RegionData& data_c,
                         std::span<const Point> border_points, const Hyperparams& theta,
                         const BorderWeights& weights) {
  const Eigen::VectorXd& w = weights.values;
  const double total = w.sum();
  if (total == 0.0) throw InputError("unit_weights: weights sum to zero");
  const CovMatrices cov = assemble_covariances(data_t, data_c, border_points, theta);
  UnitWeights out;
  out.treatment = cholesky_with_jitter(cov.sigma_tt).solve(cov.k_bt.transpose() * w) / total;
  out.control = -cholesky_with_jitter(cov.sigma_cc).solve(cov.k_bc.transpose() * w) / total;
  return out;
}

Eigen::VectorXd kde_density(std::span<const Point> points, std::span<const Point> eval_at,
                            double bandwidth) {
  if (points.empty()) throw InputError("kde_density: no points");
  if (!(bandwidth > 0.0)) throw InputError("kde_density: bandwidth must be > 0");
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm_const =
      1.0 / (2.0 * M_PI * bandwidth * bandwidth * static_cast<double>(points.size()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(eval_at.size()));
  for (std::size_t i = 0; i < eval_at.size(); ++i) {
    double acc = 0.0;
    for (const auto& p : points) acc += std::exp(-squared_norm(eval_at[i] - p) * inv_two_h2);
    out[static_cast<Eigen::Index>(i)] = norm_const * acc;
  }
  return out;
}

}  // namespace geordd
