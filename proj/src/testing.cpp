#include "geordd/testing.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "geordd/rng.hpp"

namespace geordd {

NullModel::NullModel(const RegionData& data_t, const RegionData& data_c,
                     const Hyperparams& theta)
    : n_t_(data_t.size()) {
  // Only the joint covariance is needed; border points are irrelevant here,
  // so assemble the blocks directly.
  theta.validate();
  data_t.validate();
  data_c.validate();
  const Eigen::Index n_c = data_c.size();
  const Eigen::Index n = n_t_ + n_c;
  const double m2 = theta.mean_scale * theta.mean_scale;
  const double e2 = theta.noise * theta.noise;

  joint_cov_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point a = i < n_t_ ? data_t.location(i) : data_c.location(i - n_t_);
    for (Eigen::Index j = i; j < n; ++j) {
      const Point b = j < n_t_ ? data_t.location(j) : data_c.location(j - n_t_);
      const double v = m2 + sqexp_kernel(a, b, theta);
      joint_cov_(i, j) = v;
      joint_cov_(j, i) = v;
    }
  }
  joint_cov_.diagonal().array() += e2;
  factor_ = cholesky_with_jitter(joint_cov_);
}

Eigen::VectorXd NullModel::sample(std::uint64_t seed) const {
  Rng rng(seed);
  return factor_.llt.matrixL() * rng.normal_vector(size());
}

std::string method_name(TestMethod method) {
  switch (method) {
    case TestMethod::kInvAnalytic: return "INV_ANALYTIC";
    case TestMethod::kInvBootstrap: return "INV_BOOTSTRAP";
    case TestMethod::kMllBootstrap: return "MLL_BOOTSTRAP";
    case TestMethod::kChi2Bootstrap: return "CHI2_BOOTSTRAP";
  }
  return "INV_ANALYTIC";
}

namespace {

// Everything the tests reuse across bootstrap draws: prediction matrices,
// cached factors, and the inverse-variance weight row.
struct TestWorkspace {
  CovMatrices cov;
  CholFactor chol_tt;
  CholFactor chol_cc;
  Eigen::MatrixXd w_t;  // K_BT Sigma_TT^-1
  Eigen::MatrixXd w_c;  // K_BC Sigma_CC^-1
  Eigen::MatrixXd cliff_cov;
  CholFactor chol_cliff;
  Eigen::VectorXd inv_weights;      // Sigma_cliff^-1 1
  Eigen::RowVectorXd inv_stat_row;  // stat = row . [Y_T; Y_C]
  NullModel null_model;
  // Marginal likelihood constants (theta fixed throughout).
  double logdet_m1 = 0.0;
  double logdet_m0 = 0.0;
  Eigen::Index n_t = 0;
  Eigen::Index n_c = 0;

  TestWorkspace(const RegionData& data_t, const RegionData& data_c,
                std::span<const Point> border_points, const Hyperparams& theta)
      : null_model(data_t, data_c, theta) {
    cov = assemble_covariances(data_t, data_c, border_points, theta);
    chol_tt = cholesky_with_jitter(cov.sigma_tt);
    chol_cc = cholesky_with_jitter(cov.sigma_cc);
    w_t = chol_tt.solve(cov.k_bt.transpose()).transpose();
    w_c = chol_cc.solve(cov.k_bc.transpose()).transpose();
    cliff_cov = 2.0 * cov.k_bb - w_t * cov.k_bt.transpose() - w_c * cov.k_bc.transpose();
    cliff_cov = 0.5 * (cliff_cov + cliff_cov.transpose()).eval();
    chol_cliff = cholesky_with_jitter(cliff_cov);
    inv_weights = chol_cliff.solve(Eigen::VectorXd::Ones(cliff_cov.rows()));
    const double total = inv_weights.sum();
    inv_stat_row.resize(w_t.cols() + w_c.cols());
    inv_stat_row << (inv_weights.transpose() * w_t) / total,
        -(inv_weights.transpose() * w_c) / total;
    logdet_m1 = chol_tt.log_det() + chol_cc.log_det();
    logdet_m0 = null_model.factor().log_det();
    n_t = data_t.size();
    n_c = data_c.size();
  }

  double inv_statistic(const Eigen::VectorXd& y) const { return inv_stat_row.dot(y); }

  Eigen::VectorXd cliff_mean(const Eigen::VectorXd& y) const {
    return w_t * y.head(n_t) - w_c * y.tail(n_c);
  }

  double chi2(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd mu = cliff_mean(y);
    return mu.dot(chol_cliff.solve(mu));
  }

  double mll(const Eigen::VectorXd& y) const {
    const double quad_m1 = y.head(n_t).dot(chol_tt.solve(y.head(n_t))) +
                           y.tail(n_c).dot(chol_cc.solve(y.tail(n_c)));
    const double quad_m0 = y.dot(null_model.factor().solve(y));
    return -0.5 * (quad_m1 + logdet_m1) + 0.5 * (quad_m0 + logdet_m0);
  }

  double statistic(BootstrapStatistic which, const Eigen::VectorXd& y) const {
    switch (which) {
      case BootstrapStatistic::kInv: return inv_statistic(y);
      case BootstrapStatistic::kMll: return mll(y);
      case BootstrapStatistic::kChi2: return chi2(y);
    }
    return 0.0;
  }

  // Variance of w'mu_cliff / w'1 under the null model (Sigma_M0 restricted to
  // the prediction maps). Written in terms of the induced unit weights.
  double null_variance(const Eigen::VectorXd& w) const {
    const double total = w.sum();
    Eigen::VectorXd row(n_t + n_c);
    row << (w.transpose() * w_t).transpose() / total, -(w.transpose() * w_c).transpose() / total;
    return row.dot(null_model.joint_cov() * row);
  }
};

Eigen::VectorXd stack_outcomes(const RegionData& data_t, const RegionData& data_c) {
  Eigen::VectorXd y(data_t.size() + data_c.size());
  y << data_t.outcomes, data_c.outcomes;
  return y;
}

}  // namespace

double null_statistic_variance(const RegionData& data_t, const RegionData& data_c,
                               std::span<const Point> border_points, const Hyperparams& theta,
                               const Eigen::VectorXd& weights) {
  const TestWorkspace ws(data_t, data_c, border_points, theta);
  if (weights.size() != ws.cliff_cov.rows()) {
    throw InputError("null_statistic_variance: weight length mismatch");
  }
  return ws.null_variance(weights);
}

TestResult test_inv_analytic(const RegionData& data_t, const RegionData& data_c,
                             std::span<const Point> border_points, const Hyperparams& theta) {
  const TestWorkspace ws(data_t, data_c, border_points, theta);
  TestResult out;
  out.method = TestMethod::kInvAnalytic;
  out.statistic = ws.inv_statistic(stack_outcomes(data_t, data_c));
  out.null_summary = {0.0, std::sqrt(ws.null_variance(ws.inv_weights))};
  out.p_value = 2.0 * normal_cdf(-std::abs(out.statistic) / out.null_summary.sd);
  return out;
}

TestResult test_bootstrap(const RegionData& data_t, const RegionData& data_c,
                          std::span<const Point> border_points, const Hyperparams& theta,
                          BootstrapStatistic statistic, const BootstrapOptions& options) {
  if (options.draws < 100) {
    throw InputError("test_bootstrap: needs at least 100 draws, got " +
                     std::to_string(options.draws));
  }
  const TestWorkspace ws(data_t, data_c, border_points, theta);
  const double observed = ws.statistic(statistic, stack_outcomes(data_t, data_c));

  const int draws = options.draws;
  std::vector<double> simulated(static_cast<std::size_t>(draws));
  int n_threads = options.threads > 0
                      ? options.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min<int>(n_threads, draws);

  // Draw b always uses stream derive_seed(seed, b), so the result does not
  // depend on the thread count.
  const auto worker = [&](int first, int last) {
    for (int b = first; b < last; ++b) {
      const Eigen::VectorXd y = ws.null_model.sample(derive_seed(options.seed, b));
      simulated[static_cast<std::size_t>(b)] = ws.statistic(statistic, y);
    }
  };
  if (n_threads <= 1) {
    worker(0, draws);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (draws + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(draws, first + chunk);
      if (first < last) pool.emplace_back(worker, first, last);
    }
    for (auto& th : pool) th.join();
  }

  int exceed = 0;
  double sum = 0.0, sum2 = 0.0;
  for (const double s : simulated) {
    const bool hit = statistic == BootstrapStatistic::kInv ? std::abs(s) >= std::abs(observed)
                                                           : s >= observed;
    exceed += hit ? 1 : 0;
    sum += s;
    sum2 += s * s;
  }
  TestResult out;
  out.method = statistic == BootstrapStatistic::kInv    ? TestMethod::kInvBootstrap
               : statistic == BootstrapStatistic::kMll ? TestMethod::kMllBootstrap
                                                        : TestMethod::kChi2Bootstrap;
  out.statistic = observed;
  out.bootstrap_draws = draws;
  out.seed = options.seed;
  out.p_value = (1.0 + exceed) / (draws + 1.0);
  const double mean = sum / draws;
  out.null_summary = {mean, std::sqrt(std::max(0.0, sum2 / draws - mean * mean))};
  return out;
}

double mll_statistic(const RegionData& data_t, const RegionData& data_c,
                     const Hyperparams& theta) {
  const double m2 = theta.mean_scale * theta.mean_scale;
  const double e2 = theta.noise * theta.noise;
  const auto region_cov = [&](const RegionData& region) {
    Eigen::MatrixXd cov(region.size(), region.size());
    for (Eigen::Index i = 0; i < region.size(); ++i) {
      for (Eigen::Index j = 0; j < region.size(); ++j) {
        cov(i, j) = m2 + sqexp_kernel(region.location(i), region.location(j), theta);
      }
    }
    cov.diagonal().array() += e2;
    return cov;
  };
  const double lml_m1 = log_marginal_likelihood(data_t.outcomes, region_cov(data_t)) +
                        log_marginal_likelihood(data_c.outcomes, region_cov(data_c));
  const NullModel null_model(data_t, data_c, theta);
  const double lml_m0 =
      log_marginal_likelihood(stack_outcomes(data_t, data_c), null_model.joint_cov());
  return lml_m1 - lml_m0;
}

double chi2_statistic(const CliffPosterior& cliff) {
  const CholFactor factor = cholesky_with_jitter(cliff.cov);
  return cliff.mean.dot(factor.solve(cliff.mean));
}

double pseudo_p_value(const LateResult& late) {
  return 2.0 * normal_cdf(-std::abs(late.mean) / late.sd());
}

std::vector<double> default_placebo_angles() {
  std::vector<double> angles;
  for (int a = 1; a <= 180; ++a) angles.push_back(static_cast<double>(a));
  return angles;
}

PlaceboSuite placebo_suite(const RegionData& region, const Hyperparams& theta,
                           const std::vector<double>& angles_deg, TestMethod method,
                           const BootstrapOptions& options, int sentinel_count) {
  if (region.size() < 20) {
    throw InputError("placebo_suite: needs at least 20 units, got " +
                     std::to_string(region.size()));
  }
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(region.size()));
  for (Eigen::Index i = 0; i < region.size(); ++i) pts.push_back(region.location(i));

  const auto subset = [&](const std::vector<int>& idx, const std::string& label) {
    RegionData out;
    out.label = label;
    out.locations.resize(static_cast<Eigen::Index>(idx.size()), 2);
    out.outcomes.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.locations.row(static_cast<Eigen::Index>(i)) = region.locations.row(idx[i]);
      out.outcomes[static_cast<Eigen::Index>(i)] = region.outcomes[idx[i]];
    }
    return out;
  };

  PlaceboSuite suite;
  suite.note =
      "placebo p-values along the angle grid are highly correlated; expect only "
      "rough uniformity";
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    PlaceboResult row;
    row.angle_deg = angles_deg[i];
    try {
      const AngledSplit split = split_by_angle(pts, angles_deg[i]);
      const RegionData pseudo_t = subset(split.side_b, "placebo_t");
      const RegionData pseudo_c = subset(split.side_a, "placebo_c");
      const SentinelSet sentinels = place_sentinels(split.border, sentinel_count);
      TestResult test;
      if (method == TestMethod::kInvAnalytic) {
        test = test_inv_analytic(pseudo_t, pseudo_c, sentinels.points, theta);
      } else {
        const BootstrapStatistic stat = method == TestMethod::kInvBootstrap
                                            ? BootstrapStatistic::kInv
                                        : method == TestMethod::kMllBootstrap
                                            ? BootstrapStatistic::kMll
                                            : BootstrapStatistic::kChi2;
        BootstrapOptions per_angle = options;
        per_angle.seed = derive_seed(options.seed, 0xa11e5 + i);
        test = test_bootstrap(pseudo_t, pseudo_c, sentinels.points, theta, stat, per_angle);
      }
      row.p_value = test.p_value;
      row.ok = true;
      const int bin = std::min(9, static_cast<int>(row.p_value * 10.0));
      ++suite.histogram[static_cast<std::size_t>(bin)];
    } catch (const Error& e) {
      row.error = e.what();
    }
    suite.results.push_back(std::move(row));
  }
  return suite;
}

}  // namespace geordd
