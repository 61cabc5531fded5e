#include "geordd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>

#include "geordd/cliff.hpp"
#include "geordd/linalg.hpp"
#include "geordd/rng.hpp"
#include "geordd/testing.hpp"

namespace geordd {

namespace {

// One-sided local linear fit; returns the weight row for the intercept at 0.
Eigen::RowVectorXd llr_intercept_weights(const Eigen::VectorXd& x, double bandwidth) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd kernel(n);
  int support = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = std::abs(x[i]) / bandwidth;
    kernel[i] = u < 1.0 ? 1.0 - u : 0.0;
    support += kernel[i] > 0.0 ? 1 : 0;
  }
  if (support < 2) {
    throw NumericalError("projected_1d_rdd: fewer than 2 units inside the kernel support");
  }
  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const Eigen::MatrixXd xtw = design.transpose() * kernel.asDiagonal();
  const Eigen::Matrix2d gram = xtw * design;
  if (std::abs(gram.determinant()) < 1e-12 * bandwidth * bandwidth *
                                         static_cast<double>(support * support)) {
    throw NumericalError("projected_1d_rdd: singular design within the kernel support");
  }
  return (gram.inverse() * xtw).row(0);
}

Eigen::VectorXd border_distances(const RegionData& data, const Border& border, double sign) {
  Eigen::VectorXd x(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    x[i] = sign * border.project(data.location(i)).distance;
  }
  return x;
}

}  // namespace

Rdd1dResult projected_1d_rdd(const RegionData& data_t, const RegionData& data_c,
                             const Border& border, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InputError("projected_1d_rdd: bandwidth must be > 0");
  data_t.validate();
  data_c.validate();
  const Eigen::VectorXd x_t = border_distances(data_t, border, +1.0);
  const Eigen::VectorXd x_c = border_distances(data_c, border, -1.0);
  Rdd1dResult out;
  out.weights_t = llr_intercept_weights(x_t, bandwidth).transpose();
  out.weights_c = -llr_intercept_weights(x_c, bandwidth).transpose();
  out.estimate = out.weights_t.dot(data_t.outcomes) + out.weights_c.dot(data_c.outcomes);
  return out;
}

namespace {

std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index cap, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (n <= cap) return idx;
  // Seeded Fisher-Yates, keep the first `cap`.
  for (std::size_t i = 0; i < static_cast<std::size_t>(cap); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * (idx.size() - i));
    std::swap(idx[i], idx[std::min(j, idx.size() - 1)]);
  }
  idx.resize(static_cast<std::size_t>(cap));
  std::sort(idx.begin(), idx.end());
  return idx;
}

RegionData take_rows(const RegionData& data, const std::vector<Eigen::Index>& idx) {
  RegionData out;
  out.label = data.label;
  out.locations.resize(static_cast<Eigen::Index>(idx.size()), 2);
  out.outcomes.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.locations.row(static_cast<Eigen::Index>(i)) = data.locations.row(idx[i]);
    out.outcomes[static_cast<Eigen::Index>(i)] = data.outcomes[idx[i]];
  }
  return out;
}

}  // namespace

ConfoundingResult sim_confounding(const ConfoundingConfig& config) {
  if (config.n < 4) throw InputError("sim_confounding: n too small");
  Rng rng(derive_seed(config.seed, 0xc0f0));

  // Quadrant masses (2, 1, 2, 1) * rho0: dense top-left and bottom-right.
  RegionData top, bottom;
  top.label = "treatment";
  bottom.label = "control";
  std::vector<Point> pts_top, pts_bottom;
  std::vector<double> y_top, y_bottom;
  for (int i = 0; i < config.n; ++i) {
    const double u = 6.0 * rng.uniform();
    Point p;
    if (u < 2.0) {
      p = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};  // top left, 2*rho0
    } else if (u < 3.0) {
      p = {rng.uniform(1.0, 2.0), rng.uniform(0.0, 1.0)};  // top right, rho0
    } else if (u < 5.0) {
      p = {rng.uniform(1.0, 2.0), rng.uniform(-1.0, 0.0)};  // bottom right, 2*rho0
    } else {
      p = {rng.uniform(0.0, 1.0), rng.uniform(-1.0, 0.0)};  // bottom left, rho0
    }
    const double y = config.alpha * p.x + config.noise * rng.normal();
    if (p.y > 0.0) {
      pts_top.push_back(p);
      y_top.push_back(y);
    } else {
      pts_bottom.push_back(p);
      y_bottom.push_back(y);
    }
  }
  const auto fill = [](RegionData& region, const std::vector<Point>& pts,
                       const std::vector<double>& ys) {
    region.locations.resize(static_cast<Eigen::Index>(pts.size()), 2);
    region.outcomes.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      region.locations(static_cast<Eigen::Index>(i), 0) = pts[i].x;
      region.locations(static_cast<Eigen::Index>(i), 1) = pts[i].y;
      region.outcomes[static_cast<Eigen::Index>(i)] = ys[i];
    }
  };
  fill(top, pts_top, y_top);
  fill(bottom, pts_bottom, y_bottom);

  const Border border({{0.0, 0.0}, {2.0, 0.0}});
  ConfoundingResult out;
  out.n_treatment = static_cast<int>(top.size());
  out.n_control = static_cast<int>(bottom.size());
  out.projected_1d_estimate = projected_1d_rdd(top, bottom, border, config.bandwidth).estimate;

  // The GP analysis is O(n^3), so it runs on seeded subsamples: a small one to
  // fit hyperparameters, a larger one for the estimate.
  Rng sub_rng(derive_seed(config.seed, 0x5ab5));
  const auto fit_t = take_rows(top, subsample_indices(top.size(), config.fit_max_units / 2, sub_rng));
  const auto fit_c =
      take_rows(bottom, subsample_indices(bottom.size(), config.fit_max_units / 2, sub_rng));
  Hyperparams init;
  init.lengthscale = 0.3;
  init.gp_scale = 1.0;
  init.noise = 0.3;
  FitOptions fit_options;
  fit_options.seed = derive_seed(config.seed, 0xf17);
  out.fitted = fit_hyperparams({fit_t, fit_c}, init, fit_options);

  const auto est_t =
      take_rows(top, subsample_indices(top.size(), config.geordd_max_units / 2, sub_rng));
  const auto est_c =
      take_rows(bottom, subsample_indices(bottom.size(), config.geordd_max_units / 2, sub_rng));
  const SentinelSet sentinels = place_sentinels(border, config.sentinel_count);
  const CliffPosterior cliff = cliff_posterior(est_t, est_c, sentinels.points, out.fitted);
  out.geordd_inv_estimate = late_inverse_variance(cliff).mean;
  return out;
}

double wiggly_border_height(int n_wiggles, double amplitude, double s1) {
  if (n_wiggles <= 0 || s1 <= 0.0 || s1 >= 0.5) return 0.0;
  const double period = 0.5 / n_wiggles;
  const double phase = s1 / period - std::floor(s1 / period);
  if (phase < 0.25) return amplitude * 4.0 * phase;
  if (phase < 0.75) return amplitude * (2.0 - 4.0 * phase);
  return amplitude * (4.0 * phase - 4.0);
}

Border wiggly_border(int n_wiggles, double amplitude) {
  if (n_wiggles <= 0) return Border({{0.0, 0.0}, {2.0, 0.0}});
  std::vector<Point> vertices;
  const double quarter = 0.5 / n_wiggles / 4.0;
  for (int k = 0; k <= 4 * n_wiggles; ++k) {
    const double s1 = k * quarter;
    const double height = (k % 4 == 1) ? amplitude : (k % 4 == 3) ? -amplitude : 0.0;
    vertices.push_back({s1, height});
  }
  vertices.push_back({2.0, 0.0});
  return Border(std::move(vertices));
}

namespace {

struct WigglyWorld {
  RegionData units_t, units_c;    // outcomes rewritten per draw
  std::vector<double> effect_t;   // tau(s) = s1 for treatment units
  Border border{std::vector<Point>{{0.0, 0.0}, {2.0, 0.0}}};
  Eigen::MatrixXd gen_chol_l;     // Cholesky of the generating covariance
  std::vector<Eigen::Index> to_t; // stacked index -> position within region
  std::vector<Eigen::Index> to_c;
  std::vector<bool> is_treated;
};

double block_density(const WigglyScenario& sc, double s1) {
  if (s1 < 0.5) return sc.block_density[0];
  if (s1 < 1.5) return sc.block_density[1];
  return sc.block_density[2];
}

WigglyWorld make_wiggly_world(const WigglyScenario& sc, std::uint64_t seed) {
  WigglyWorld world;
  world.border = wiggly_border(sc.n_wiggles, sc.amplitude);

  // One fixed draw of locations; the location stream ignores n_wiggles so the
  // same units are reused across the wiggle grid.
  Rng rng(derive_seed(seed, 0x716671));
  const double mass_left = sc.block_density[0] * 1.0;
  const double mass_mid = sc.block_density[1] * 2.0;
  const double mass_right = sc.block_density[2] * 1.0;
  const double total = mass_left + mass_mid + mass_right;
  std::vector<Point> pts;
  for (int i = 0; i < sc.n_units; ++i) {
    const double u = total * rng.uniform();
    Point p;
    if (u < mass_left) {
      p = {rng.uniform(0.0, 0.5), rng.uniform(-1.0, 1.0)};
    } else if (u < mass_left + mass_mid) {
      p = {rng.uniform(0.5, 1.5), rng.uniform(-1.0, 1.0)};
    } else {
      p = {rng.uniform(1.5, 2.0), rng.uniform(-1.0, 1.0)};
    }
    pts.push_back(p);
  }

  std::vector<Point> pts_t, pts_c;
  for (const auto& p : pts) {
    const bool treated = p.y > wiggly_border_height(sc.n_wiggles, sc.amplitude, p.x);
    world.is_treated.push_back(treated);
    if (treated) {
      world.to_t.push_back(static_cast<Eigen::Index>(pts_t.size()));
      world.to_c.push_back(-1);
      pts_t.push_back(p);
      world.effect_t.push_back(p.x);
    } else {
      world.to_c.push_back(static_cast<Eigen::Index>(pts_c.size()));
      world.to_t.push_back(-1);
      pts_c.push_back(p);
    }
  }
  const auto fill = [](RegionData& region, const std::vector<Point>& ps, const char* label) {
    region.label = label;
    region.locations.resize(static_cast<Eigen::Index>(ps.size()), 2);
    region.outcomes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      region.locations(static_cast<Eigen::Index>(i), 0) = ps[i].x;
      region.locations(static_cast<Eigen::Index>(i), 1) = ps[i].y;
    }
  };
  fill(world.units_t, pts_t, "above");
  fill(world.units_c, pts_c, "below");

  // Generating process: one spatial field plus iid noise, no mean term.
  Hyperparams gen;
  gen.lengthscale = sc.lengthscale;
  gen.gp_scale = sc.gp_scale;
  gen.noise = sc.noise;
  gen.mean_scale = 1.0;  // unused below
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = sqexp_kernel(pts[static_cast<std::size_t>(i)],
                                    pts[static_cast<std::size_t>(j)], gen);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  cov.diagonal().array() += sc.noise * sc.noise;
  world.gen_chol_l = cholesky_with_jitter(cov).llt.matrixL();
  return world;
}

// Linear read-outs of the cliff posterior at one point set.
struct CliffMaps {
  Eigen::MatrixXd w_t, w_c;  // posterior mean maps
  Eigen::MatrixXd cov;       // posterior covariance
  std::vector<Point> points;
};

CliffMaps make_cliff_maps(const RegionData& data_t, const RegionData& data_c,
                          std::span<const Point> points, const Hyperparams& theta) {
  CliffMaps maps;
  maps.points.assign(points.begin(), points.end());
  const CovMatrices cov = assemble_covariances(data_t, data_c, points, theta);
  maps.w_t = cholesky_with_jitter(cov.sigma_tt).solve(cov.k_bt.transpose()).transpose();
  maps.w_c = cholesky_with_jitter(cov.sigma_cc).solve(cov.k_bc.transpose()).transpose();
  maps.cov = 2.0 * cov.k_bb - maps.w_t * cov.k_bt.transpose() - maps.w_c * cov.k_bc.transpose();
  maps.cov = 0.5 * (maps.cov + maps.cov.transpose()).eval();
  return maps;
}

// Arc-length integral of f(x(t)) over the polyline, with the integrand split
// at the block boundaries so piecewise-constant densities integrate exactly.
double border_integral(const Border& border, const WigglyScenario& sc, bool weight_by_density,
                       bool integrand_x) {
  const auto& v = border.vertices();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    double x0 = v[i].x, x1 = v[i + 1].x;
    const double seg_len = distance(v[i], v[i + 1]);
    std::vector<double> cuts{0.0, 1.0};
    for (const double boundary : {0.5, 1.5}) {
      if ((x0 < boundary && x1 > boundary) || (x0 > boundary && x1 < boundary)) {
        cuts.push_back((boundary - x0) / (x1 - x0));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double t_mid = 0.5 * (cuts[c] + cuts[c + 1]);
      const double x_mid = x0 + t_mid * (x1 - x0);
      const double len = (cuts[c + 1] - cuts[c]) * seg_len;
      double value = integrand_x ? x_mid : 1.0;
      if (weight_by_density) value *= block_density(sc, x_mid);
      acc += value * len;
    }
  }
  return acc;
}

}  // namespace

std::vector<WigglyRow> sim_wiggly(const WigglyScenario& scenario, int n_sims,
                                  std::uint64_t seed) {
  if (n_sims < 1) throw InputError("sim_wiggly: n_sims must be >= 1");
  const WigglyWorld world = make_wiggly_world(scenario, seed);

  Hyperparams theta;
  theta.lengthscale = scenario.lengthscale;
  theta.gp_scale = scenario.gp_scale;
  theta.noise = scenario.noise;
  theta.mean_scale = scenario.mean_scale;

  // Three point sets carry all six schemes.
  const SentinelSet sentinels = place_sentinels(world.border, scenario.sentinel_count);
  std::vector<Point> unit_proj;
  for (const auto& region : {world.units_t, world.units_c}) {
    for (Eigen::Index i = 0; i < region.size(); ++i) {
      unit_proj.push_back(world.border.project(region.location(i)).point);
    }
  }
  const std::vector<Polygon> rectangles{
      Polygon{{{{0, 0}, {2, 0}, {2, 1}, {0, 1}, {0, 0}}}},
      Polygon{{{{0, -1}, {2, -1}, {2, 0}, {0, 0}, {0, -1}}}}};
  const BufferGrid grid = buffer_grid(rectangles, world.border,
                                      std::numeric_limits<double>::infinity(),
                                      scenario.grid_spacing);
  std::vector<Point> grid_proj;
  Eigen::VectorXd grid_density(static_cast<Eigen::Index>(grid.points.size()));
  for (std::size_t l = 0; l < grid.points.size(); ++l) {
    grid_proj.push_back(world.border.project(grid.points[l]).point);
    grid_density[static_cast<Eigen::Index>(l)] = block_density(scenario, grid.points[l].x);
  }

  const CliffMaps sent_maps = make_cliff_maps(world.units_t, world.units_c, sentinels.points, theta);
  const CliffMaps proj_maps = make_cliff_maps(world.units_t, world.units_c, unit_proj, theta);
  const CliffMaps grid_maps = make_cliff_maps(world.units_t, world.units_c, grid_proj, theta);

  struct Scheme {
    WeightScheme id;
    const CliffMaps* maps;
    Eigen::VectorXd weights;
    double estimand;
  };
  std::vector<Scheme> schemes;

  Eigen::VectorXd rho_sent(sentinels.count());
  for (int r = 0; r < sentinels.count(); ++r) {
    rho_sent[r] = block_density(scenario, sentinels.points[static_cast<std::size_t>(r)].x);
  }
  const Eigen::VectorXd inv_w =
      cholesky_with_jitter(sent_maps.cov).solve(Eigen::VectorXd::Ones(sent_maps.cov.rows()));

  const double border_len = border_integral(world.border, scenario, false, false);
  const double unif_estimand = border_integral(world.border, scenario, false, true) / border_len;
  const double rho_estimand = border_integral(world.border, scenario, true, true) /
                              border_integral(world.border, scenario, true, false);
  Eigen::VectorXd sent_x(sentinels.count());
  for (int r = 0; r < sentinels.count(); ++r) sent_x[r] = sentinels.points[static_cast<std::size_t>(r)].x;
  const double inv_estimand = inv_w.dot(sent_x) / inv_w.sum();
  Eigen::VectorXd proj_x(static_cast<Eigen::Index>(unit_proj.size()));
  for (std::size_t i = 0; i < unit_proj.size(); ++i) proj_x[static_cast<Eigen::Index>(i)] = unit_proj[i].x;
  Eigen::VectorXd grid_x(static_cast<Eigen::Index>(grid_proj.size()));
  for (std::size_t i = 0; i < grid_proj.size(); ++i) grid_x[static_cast<Eigen::Index>(i)] = grid_proj[i].x;

  schemes.push_back({WeightScheme::kUniform, &sent_maps,
                     Eigen::VectorXd::Ones(sent_maps.cov.rows()), unif_estimand});
  schemes.push_back({WeightScheme::kDensity, &sent_maps, rho_sent, rho_estimand});
  schemes.push_back({WeightScheme::kInverseVariance, &sent_maps, inv_w, inv_estimand});
  schemes.push_back({WeightScheme::kProjected, &proj_maps,
                     Eigen::VectorXd::Ones(proj_x.size()), proj_x.mean()});
  schemes.push_back({WeightScheme::kGeo, &grid_maps, Eigen::VectorXd::Ones(grid_x.size()),
                     grid_x.mean()});
  schemes.push_back({WeightScheme::kPop, &grid_maps, grid_density,
                     grid_density.dot(grid_x) / grid_density.sum()});

  // Per draw, only the posterior means move; reduce each scheme to one row
  // vector against the stacked outcomes.
  const Eigen::Index n_t = world.units_t.size();
  const Eigen::Index n = n_t + world.units_c.size();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> sds;
  for (const auto& scheme : schemes) {
    const double total = scheme.weights.sum();
    Eigen::RowVectorXd row(n);
    row << (scheme.weights.transpose() * scheme.maps->w_t) / total,
        -(scheme.weights.transpose() * scheme.maps->w_c) / total;
    rows.push_back(row);
    sds.push_back(std::sqrt(scheme.weights.dot(scheme.maps->cov * scheme.weights)) /
                  std::abs(total));
  }

  // tau(s) = s1 on the treatment side enters through the same rows.
  Eigen::VectorXd effect = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    effect[i] = world.effect_t[static_cast<std::size_t>(i)];
  }

  std::vector<double> mean_acc(schemes.size(), 0.0);
  const Eigen::Index n_units = world.gen_chol_l.rows();
  for (int sim = 0; sim < n_sims; ++sim) {
    Rng rng(derive_seed(seed, 0xd5a0000 + static_cast<std::uint64_t>(sim)));
    const Eigen::VectorXd field = world.gen_chol_l * rng.normal_vector(n_units);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n_units; ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      if (world.is_treated[k]) {
        y[world.to_t[k]] = field[i];
      } else {
        y[n_t + world.to_c[k]] = field[i];
      }
    }
    y += effect;
    for (std::size_t s = 0; s < schemes.size(); ++s) mean_acc[s] += rows[s].dot(y);
  }

  std::vector<WigglyRow> table;
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    WigglyRow row;
    row.scheme = schemes[s].id;
    row.n_wiggles = scenario.n_wiggles;
    row.mean_estimate = mean_acc[s] / n_sims;
    row.mean_posterior_sd = sds[s];
    row.estimand = schemes[s].estimand;
    table.push_back(row);
  }
  return table;
}

PowerLayout lattice_layout(int rows, int cols, double spacing, double jitter,
                           std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw InputError("lattice_layout: empty lattice");
  Rng rng(derive_seed(seed, 0x1a771ce));
  PowerLayout layout;
  const auto fill = [&](RegionData& region, double side, const char* label) {
    region.label = label;
    region.locations.resize(rows * cols, 2);
    region.outcomes = Eigen::VectorXd::Zero(rows * cols);
    Eigen::Index at = 0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double x = side * ((c + 0.5) * spacing + rng.uniform(-jitter, jitter));
        const double y = (r + 0.5) * spacing + rng.uniform(-jitter, jitter);
        region.locations(at, 0) = x;
        region.locations(at, 1) = y;
        ++at;
      }
    }
  };
  fill(layout.units_t, -1.0, "treatment");
  fill(layout.units_c, +1.0, "control");
  layout.border = Border({{0.0, 0.0}, {0.0, rows * spacing}});
  return layout;
}

std::vector<PowerRow> sim_power(const PowerLayout& layout, const Hyperparams& theta,
                                const PowerConfig& config) {
  if (config.n_sims < 1) throw InputError("sim_power: n_sims must be >= 1");
  const Eigen::Index n_t = layout.units_t.size();
  const Eigen::Index n_c = layout.units_c.size();

  // Outcomes come from the tests' own null model (one continuous process
  // spanning both regions), so the bootstrap calibration is exact by
  // construction; the effect is added on top.
  const NullModel generator(layout.units_t, layout.units_c, theta);
  const SentinelSet sentinels = place_sentinels(layout.border, config.sentinel_count);

  int reject_mll = 0, reject_chi2 = 0, reject_uncal = 0, reject_cal = 0;
  int reject_cal_boot = 0;
  for (int sim = 0; sim < config.n_sims; ++sim) {
    Eigen::VectorXd y =
        generator.sample(derive_seed(config.seed, 0x90e70000 + static_cast<std::uint64_t>(sim)));
    y.head(n_t).array() += config.effect;

    RegionData data_t = layout.units_t;
    RegionData data_c = layout.units_c;
    data_t.outcomes = y.head(n_t);
    data_c.outcomes = y.tail(n_c);

    const CliffPosterior cliff = cliff_posterior(data_t, data_c, sentinels.points, theta);
    const LateResult inv = late_inverse_variance(cliff);
    if (pseudo_p_value(inv) < config.alpha) ++reject_uncal;
    if (test_inv_analytic(data_t, data_c, sentinels.points, theta).p_value < config.alpha) {
      ++reject_cal;
    }

    BootstrapOptions boot;
    boot.draws = config.bootstrap_draws;
    boot.threads = config.threads;
    boot.seed = derive_seed(config.seed, 0xb0070000 + static_cast<std::uint64_t>(sim));
    if (test_bootstrap(data_t, data_c, sentinels.points, theta, BootstrapStatistic::kMll, boot)
            .p_value < config.alpha) {
      ++reject_mll;
    }
    boot.seed = derive_seed(config.seed, 0xc0de0000 + static_cast<std::uint64_t>(sim));
    if (test_bootstrap(data_t, data_c, sentinels.points, theta, BootstrapStatistic::kChi2, boot)
            .p_value < config.alpha) {
      ++reject_chi2;
    }
    boot.seed = derive_seed(config.seed, 0x1b000000 + static_cast<std::uint64_t>(sim));
    if (test_bootstrap(data_t, data_c, sentinels.points, theta, BootstrapStatistic::kInv, boot)
            .p_value < config.alpha) {
      ++reject_cal_boot;
    }
  }

  const auto row = [&](const std::string& name, int rejections) {
    return PowerRow{name, rejections, config.n_sims,
                    static_cast<double>(rejections) / config.n_sims};
  };
  return {row("mll_bootstrap", reject_mll), row("chi2_bootstrap", reject_chi2),
          row("inv_uncalibrated", reject_uncal), row("inv_calibrated", reject_cal),
          row("inv_calibrated_bootstrap", reject_cal_boot)};
}

}  // namespace geordd
