#pragma once

#include <string>

#include <Eigen/Core>

#include "geordd/errors.hpp"
#include "geordd/geometry.hpp"

namespace geordd {

/// Units of one region: locations, outcomes, and optional nonspatial
/// covariates (0 columns when absent).
struct RegionData {
  Eigen::Matrix<double, Eigen::Dynamic, 2> locations;
  Eigen::VectorXd outcomes;
  Eigen::MatrixXd covariates;
  std::string label;

  Eigen::Index size() const { return outcomes.size(); }
  Eigen::Index covariate_count() const { return covariates.cols(); }

  Point location(Eigen::Index i) const { return {locations(i, 0), locations(i, 1)}; }

  void validate() const {
    if (locations.rows() != outcomes.size()) {
      throw InputError("region '" + label + "': " + std::to_string(locations.rows()) +
                       " locations vs " + std::to_string(outcomes.size()) + " outcomes");
    }
    if (covariates.size() > 0 && covariates.rows() != outcomes.size()) {
      throw InputError("region '" + label + "': covariate rows do not match outcomes");
    }
    if (!locations.allFinite() || !outcomes.allFinite() ||
        (covariates.size() > 0 && !covariates.allFinite())) {
      throw InputError("region '" + label + "': non-finite entries");
    }
  }
};

}  // namespace geordd
