#pragma once

// Shared helpers for the test suites.

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "geordd/data.hpp"
#include "geordd/geometry.hpp"
#include "geordd/gp.hpp"
#include "geordd/linalg.hpp"
#include "geordd/rng.hpp"

namespace test_util {

inline geordd::RegionData make_region(const std::vector<geordd::Point>& pts,
                                      const std::vector<double>& y, const char* label) {
  geordd::RegionData r;
  r.label = label;
  r.locations.resize(static_cast<Eigen::Index>(pts.size()), 2);
  r.outcomes.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.locations(static_cast<Eigen::Index>(i), 0) = pts[i].x;
    r.locations(static_cast<Eigen::Index>(i), 1) = pts[i].y;
    r.outcomes[static_cast<Eigen::Index>(i)] = y[i];
  }
  return r;
}

/// Kolmogorov-Smirnov distance of a sample against Uniform(0, 1).
inline double ks_uniform_statistic(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(sample[i] - lo), std::abs(sample[i] - hi)});
  }
  return d;
}

/// Asymptotic KS critical value; c(0.01) = 1.628, c(0.05) = 1.358.
inline double ks_critical(double alpha, std::size_t n) {
  const double c = alpha <= 0.01 ? 1.62762 : 1.35810;
  return c / std::sqrt(static_cast<double>(n));
}

/// KS of a sample against the standard normal CDF.
inline double ks_normal_statistic(std::vector<double> sample) {
  for (double& v : sample) v = geordd::normal_cdf(v);
  return ks_uniform_statistic(std::move(sample));
}

/// Draw one GP-with-noise outcome vector for a region (no mean term).
inline Eigen::VectorXd draw_gp_outcomes(const geordd::RegionData& region,
                                        const geordd::Hyperparams& theta, geordd::Rng& rng) {
  const Eigen::Index n = region.size();
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      cov(i, j) = geordd::sqexp_kernel(region.location(i), region.location(j), theta);
    }
  }
  cov.diagonal().array() += theta.noise * theta.noise;
  const Eigen::MatrixXd l = geordd::cholesky_with_jitter(cov).llt.matrixL();
  return l * rng.normal_vector(n);
}

}  // namespace test_util
