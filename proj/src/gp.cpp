#include "geordd/gp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "geordd/rng.hpp"

namespace geordd {

void Hyperparams::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!positive(lengthscale) || !positive(gp_scale) || !positive(mean_scale) ||
      !nonneg(noise) || !nonneg(beta_scale)) {
    std::ostringstream msg;
    msg << "invalid hyperparameters: ell=" << lengthscale << " sigma_gp=" << gp_scale
        << " sigma_eps=" << noise << " sigma_m=" << mean_scale
        << " sigma_beta=" << beta_scale;
    throw InputError(msg.str());
  }
}

CholFactor cholesky_with_jitter(const Eigen::MatrixXd& a) {
  const double mean_diag = a.diagonal().mean();
  CholFactor factor;
  factor.llt.compute(a);
  if (factor.llt.info() == Eigen::Success) return factor;

  for (double scale = 1e-10; scale <= 1.0000001e-4; scale *= 10.0) {
    const double jitter = scale * mean_diag;
    Eigen::MatrixXd jittered = a;
    jittered.diagonal().array() += jitter;
    factor.llt.compute(jittered);
    if (factor.llt.info() == Eigen::Success) {
      factor.jitter = jitter;
      return factor;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky failed after jitter ladder: n=" << a.rows()
      << " mean(diag)=" << mean_diag << " min(diag)=" << a.diagonal().minCoeff()
      << " max|a|=" << a.cwiseAbs().maxCoeff()
      << " max jitter tried=" << 1e-4 * mean_diag;
  throw NumericalError(msg.str());
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::Matrix<double, Eigen::Dynamic, 2>& a,
                              const Eigen::Matrix<double, Eigen::Dynamic, 2>& b,
                              const Hyperparams& theta, double offset) {
  const double inv_two_ell2 = 1.0 / (2.0 * theta.lengthscale * theta.lengthscale);
  const double s2 = theta.gp_scale * theta.gp_scale;
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const double bx = b(j, 0), by = b(j, 1);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double dx = a(i, 0) - bx, dy = a(i, 1) - by;
      out(i, j) = offset + s2 * std::exp(-(dx * dx + dy * dy) * inv_two_ell2);
    }
  }
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> to_matrix(std::span<const Point> pts) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> m(static_cast<Eigen::Index>(pts.size()), 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, 0) = pts[static_cast<std::size_t>(i)].x;
    m(i, 1) = pts[static_cast<std::size_t>(i)].y;
  }
  return m;
}

}  // namespace

CovMatrices assemble_covariances(const RegionData& data_t, const RegionData& data_c,
                                 std::span<const Point> border_points,
                                 const Hyperparams& theta) {
  theta.validate();
  data_t.validate();
  data_c.validate();
  if (data_t.size() == 0 || data_c.size() == 0) {
    throw InputError("assemble_covariances: both regions must be nonempty");
  }
  const auto border = to_matrix(border_points);
  if (!border.allFinite()) throw InputError("assemble_covariances: non-finite border point");

  const double m2 = theta.mean_scale * theta.mean_scale;
  const double e2 = theta.noise * theta.noise;

  CovMatrices cov;
  cov.sigma_tt = kernel_matrix(data_t.locations, data_t.locations, theta, m2);
  cov.sigma_tt.diagonal().array() += e2;
  cov.sigma_cc = kernel_matrix(data_c.locations, data_c.locations, theta, m2);
  cov.sigma_cc.diagonal().array() += e2;
  cov.k_bt = kernel_matrix(border, data_t.locations, theta, m2);
  cov.k_bc = kernel_matrix(border, data_c.locations, theta, m2);
  cov.k_bb = kernel_matrix(border, border, theta, m2);
  cov.k_tc = kernel_matrix(data_t.locations, data_c.locations, theta, m2);
  return cov;
}

MvnPosterior mvn_condition(const Eigen::MatrixXd& obs_cov, const Eigen::MatrixXd& cross_cov,
                           const Eigen::MatrixXd& target_cov, const Eigen::VectorXd& y) {
  const CholFactor factor = cholesky_with_jitter(obs_cov);
  MvnPosterior post;
  post.mean = cross_cov * factor.solve(y);
  Eigen::MatrixXd reduction = cross_cov * factor.solve(cross_cov.transpose());
  post.cov = target_cov - reduction;
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

double log_marginal_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov) {
  const CholFactor factor = cholesky_with_jitter(cov);
  const double quad = y.dot(factor.solve(y));
  const double n = static_cast<double>(y.size());
  return -0.5 * quad - 0.5 * factor.log_det() - 0.5 * n * std::log(2.0 * M_PI);
}

SimplexResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& start, double step,
                                   int max_iterations, double tolerance) {
  // Minimize -f with the standard reflection/expansion/contraction moves.
  const auto cost = [&](const Eigen::VectorXd& x) { return -f(x); };
  const Eigen::Index d = start.size();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(d) + 1, start);
  std::vector<double> value(simplex.size());
  for (Eigen::Index i = 0; i < d; ++i) simplex[static_cast<std::size_t>(i) + 1][i] += step;
  for (std::size_t i = 0; i < simplex.size(); ++i) value[i] = cost(simplex[i]);

  const auto order = [&] {
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      for (std::size_t j = i; j > 0 && value[j] < value[j - 1]; --j) {
        std::swap(value[j], value[j - 1]);
        std::swap(simplex[j], simplex[j - 1]);
      }
    }
  };
  order();

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const double spread = std::abs(value.back() - value.front());
    if (spread <= tolerance * (std::abs(value.front()) + tolerance)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd& worst = simplex.back();
    Eigen::VectorXd reflected = centroid + (centroid - worst);
    double f_reflected = cost(reflected);

    if (f_reflected < value.front()) {
      Eigen::VectorXd expanded = centroid + 2.0 * (centroid - worst);
      const double f_expanded = cost(expanded);
      if (f_expanded < f_reflected) {
        simplex.back() = std::move(expanded);
        value.back() = f_expanded;
      } else {
        simplex.back() = std::move(reflected);
        value.back() = f_reflected;
      }
    } else if (f_reflected < value[value.size() - 2]) {
      simplex.back() = std::move(reflected);
      value.back() = f_reflected;
    } else {
      Eigen::VectorXd contracted = centroid + 0.5 * (worst - centroid);
      const double f_contracted = cost(contracted);
      if (f_contracted < value.back()) {
        simplex.back() = std::move(contracted);
        value.back() = f_contracted;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex.front() + 0.5 * (simplex[i] - simplex.front());
          value[i] = cost(simplex[i]);
        }
      }
    }
    order();
  }
  return {simplex.front(), -value.front(), iter};
}

double regions_log_marginal_likelihood(const std::vector<RegionData>& regions,
                                       const Hyperparams& theta) {
  theta.validate();
  const double m2 = theta.mean_scale * theta.mean_scale;
  const double e2 = theta.noise * theta.noise;
  const Eigen::Index p = regions.empty() ? 0 : regions.front().covariate_count();

  if (p == 0 || theta.beta_scale == 0.0) {
    double total = 0.0;
    for (const auto& region : regions) {
      Eigen::MatrixXd cov = kernel_matrix(region.locations, region.locations, theta, m2);
      cov.diagonal().array() += e2;
      total += log_marginal_likelihood(region.outcomes, cov);
    }
    return total;
  }

  // Covariates couple the regions: one joint likelihood with the stacked
  // covariance blockdiag(Sigma_rr) + sigma_beta^2 D D'.
  Eigen::Index n = 0;
  for (const auto& region : regions) n += region.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd d(n, p);
  Eigen::Index at = 0;
  for (const auto& region : regions) {
    const Eigen::Index m = region.size();
    cov.block(at, at, m, m) = kernel_matrix(region.locations, region.locations, theta, m2);
    y.segment(at, m) = region.outcomes;
    d.middleRows(at, m) = region.covariates;
    at += m;
  }
  cov.diagonal().array() += e2;
  cov.noalias() += (theta.beta_scale * theta.beta_scale) * d * d.transpose();
  return log_marginal_likelihood(y, cov);
}

Hyperparams fit_hyperparams(const std::vector<RegionData>& regions, const Hyperparams& init,
                            const FitOptions& options) {
  if (regions.empty()) throw InputError("fit_hyperparams: no regions");
  for (const auto& region : regions) {
    region.validate();
    if (region.size() == 0) throw InputError("fit_hyperparams: empty region");
  }
  init.validate();
  const Eigen::Index p = regions.front().covariate_count();
  for (const auto& region : regions) {
    if (region.covariate_count() != p) {
      throw InputError("fit_hyperparams: regions disagree on covariate count");
    }
  }
  const bool fit_beta = p > 0;
  const int dim = fit_beta ? 4 : 3;

  const auto unpack = [&](const Eigen::VectorXd& log_params) {
    Hyperparams theta = init;
    theta.lengthscale = std::exp(log_params[0]);
    theta.gp_scale = std::exp(log_params[1]);
    theta.noise = std::exp(log_params[2]);
    if (fit_beta) theta.beta_scale = std::exp(log_params[3]);
    return theta;
  };
  const auto objective = [&](const Eigen::VectorXd& log_params) {
    if (log_params.cwiseAbs().maxCoeff() > 30.0) {
      return -std::numeric_limits<double>::infinity();
    }
    try {
      return regions_log_marginal_likelihood(regions, unpack(log_params));
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd start(dim);
  start[0] = std::log(init.lengthscale);
  start[1] = std::log(init.gp_scale);
  start[2] = std::log(std::max(init.noise, 1e-8));
  if (fit_beta) start[3] = std::log(std::max(init.beta_scale, 1e-8));

  Rng rng(derive_seed(options.seed, 0x66697420));
  bool any_success = false;
  Eigen::VectorXd best = start;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    Eigen::VectorXd s = start;
    if (attempt > 0) {
      for (int i = 0; i < dim; ++i) {
        s[i] += rng.uniform(-options.restart_spread, options.restart_spread);
      }
    }
    if (!std::isfinite(objective(s))) continue;
    const SimplexResult result =
        nelder_mead_maximize(objective, s, 0.5, options.max_iterations, options.tolerance);
    if (std::isfinite(result.value)) {
      any_success = true;
      if (result.value > best_value) {
        best_value = result.value;
        best = result.argmax;
      }
    }
  }
  if (!any_success) {
    throw NumericalError("fit_hyperparams: every optimizer start failed");
  }
  return unpack(best);
}

}  // namespace geordd
