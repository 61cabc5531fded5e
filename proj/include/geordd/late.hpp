#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geordd/cliff.hpp"
#include "geordd/geometry.hpp"

namespace geordd {

enum class WeightScheme { kUniform, kDensity, kInverseVariance, kProjected, kGeo, kPop, kCustom };

std::string scheme_name(WeightScheme scheme);

/// Weight function evaluated at the cliff points. Nonnegative for every named
/// scheme except inverse-variance, whose weights may be signed.
struct BorderWeights {
  Eigen::VectorXd values;
  WeightScheme scheme = WeightScheme::kCustom;
};

struct LateResult {
  WeightScheme scheme = WeightScheme::kCustom;
  double mean = 0.0;
  double variance = 0.0;
  double tail_prob = 0.0;  // Pr(tau > 0 | Y)
  Eigen::VectorXd border_weights;
  Eigen::VectorXd unit_weights_t;  // empty unless induced weights were derived
  Eigen::VectorXd unit_weights_c;

  double sd() const { return std::sqrt(variance); }
};

/// Posterior of the weighted mean: mean = w'mu / w'1, var = w'Sigma w / (w'1)^2.
LateResult weighted_late(const CliffPosterior& cliff, const BorderWeights& weights);

LateResult late_uniform(const CliffPosterior& cliff);

/// Minimum-variance member of the family: w = Sigma^-1 1.
LateResult late_inverse_variance(const CliffPosterior& cliff);

/// Density-weighted; the density is treated as fixed (no uncertainty
/// propagation into the posterior).
LateResult late_density_weighted(const CliffPosterior& cliff, const Eigen::VectorXd& density);

/// Projected finite-population LATE: units within `delta` of the border are
/// projected onto it and the cliff posterior is evaluated at those points
/// (duplicates kept with multiplicity), then averaged without weights.
LateResult late_projected(const RegionData& data_t, const RegionData& data_c,
                          const Border& border, double delta, const Hyperparams& theta);

/// Projected-grid LATEs over the border vicinity: unweighted grid projection
/// (GEO) or density-weighted grid projection (POP) when a density is given.
LateResult late_projected_grid(const RegionData& data_t, const RegionData& data_c,
                               const Border& border, const std::vector<Polygon>& regions,
                               double delta, double nu, const Hyperparams& theta,
                               const std::function<double(const Point&)>* density = nullptr);

/// Linear coefficients on the observed outcomes implied by a weighted LATE
/// posterior mean: E(tau_w | Y) = w_T' Y_T + w_C' Y_C.
struct UnitWeights {
  Eigen::VectorXd treatment;
  Eigen::VectorXd control;
};
UnitWeights unit_weights(const RegionData& data_t, const RegionData& data_c,
                         std::span<const Point> border_points, const Hyperparams& theta,
                         const BorderWeights& weights);

/// Gaussian-kernel KDE normalized as a density over the plane.
Eigen::VectorXd kde_density(std::span<const Point> points, std::span<const Point> eval_at,
                            double bandwidth);

}  // namespace geordd
