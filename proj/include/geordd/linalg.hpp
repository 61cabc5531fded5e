#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace geordd {

/// Cholesky factor of a symmetric matrix after the jitter ladder.
struct CholFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;  // amount actually added to the diagonal

  Eigen::Index rows() const { return llt.matrixL().rows(); }

  template <typename Rhs>
  auto solve(const Rhs& b) const {
    return llt.solve(b);
  }

  /// log |A| from the factor.
  double log_det() const {
    const auto& l = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
    return 2.0 * acc;
  }
};

/// Cholesky with a jitter ladder: plain attempt first, then 1e-10*mean(diag)
/// escalating by x10 up to 1e-4*mean(diag). Throws NumericalError with
/// conditioning diagnostics if every rung fails. The sigma_m^2 term makes the
/// covariance blocks nearly rank-one, so the ladder is load-bearing here.
CholFactor cholesky_with_jitter(const Eigen::MatrixXd& a);

}  // namespace geordd
