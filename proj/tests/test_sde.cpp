#include <doctest.h>

#include <cmath>

#include "wnc/feynman_kac.hpp"
#include "wnc/noise.hpp"
#include "wnc/products.hpp"
#include "wnc/quadrature.hpp"
#include "wnc/sde.hpp"

using namespace wnc;

TEST_CASE("deterministic drift-only paths hit the closed form at grid points") {
  SdeSpec spec = constant_drift_spec(0.5);
  Eigen::VectorXd x(1);
  x << 1.0;
  PathEnsemble e = simulate_paths(spec, 1.0, x, 100, 0.01, 42);
  REQUIRE(e.steps == 100);
  for (int i = 0; i <= e.steps; i += 10) {
    double want = 1.0 + 0.5 * (i * e.dt);
    CHECK(e.states[0](i, 0) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(e.terminal(7, 0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("same seed gives bit-identical ensembles") {
  SdeSpec spec = ou_spec();
  Eigen::VectorXd x(1);
  x << 0.3;
  PathEnsemble a = simulate_paths(spec, 0.5, x, 200, 0.005, 7);
  PathEnsemble b = simulate_paths(spec, 0.5, x, 200, 0.005, 7);
  CHECK(a.terminal == b.terminal);
  PathEnsemble c = simulate_paths(spec, 0.5, x, 200, 0.005, 8);
  CHECK(a.terminal != c.terminal);
}

TEST_CASE("OU moments at n = 1e5 match within 3 standard errors") {
  SdeSpec spec = ou_spec();
  Eigen::VectorXd x(1);
  x << 1.0;
  const double t = 1.0;
  const int n = 100000;
  SimOptions opts;
  opts.keep_states = false;
  PathEnsemble e = simulate_paths(spec, t, x, n, 1e-3, 12345, opts);
  double mean = e.terminal.col(0).mean();
  double var = (e.terminal.col(0).array() - mean).square().sum() / (n - 1);
  double want_mean = std::exp(-t) * 1.0;
  double want_var = 0.5 * (1.0 - std::exp(-2.0 * t));
  double se_mean = std::sqrt(var / n);
  double se_var = var * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(mean - want_mean) <= 3.0 * se_mean);
  CHECK(std::abs(var - want_var) <= 3.0 * se_var + 2e-3);  // small Euler bias allowance
}

TEST_CASE("simulate_paths validates its preconditions") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK_THROWS_AS(simulate_paths(spec, 0.0, x, 100, 0.001, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_paths(spec, 1.0, x, 100, 0.2, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_paths(spec, 1.0, x, 10, 0.001, 1), std::invalid_argument);
}

TEST_CASE("noise integral of a frozen path matches 1-D quadrature") {
  // sigma = 0, b = 0: X stays at x, so g_alpha = int_0^t eta_alpha(t-s, x) ds.
  SdeSpec spec = pathwise_exp_spec();
  Eigen::VectorXd x(1);
  x << 0.6;
  const double t = 0.5;
  const double dt = 1e-4;
  PathEnsemble e = simulate_paths(spec, t, x, 100, dt, 3, {true, -1});
  const int m = 3;
  Eigen::VectorXd g = noise_integral(e.states[0], e.dt, m, t);
  ModeTable table(2, m);
  REQUIRE(g.size() == table.size());
  for (int r = 0; r < table.size(); ++r) {
    const auto& alpha = table.index(r);
    double want = adaptive_simpson(
        [&](double s) {
          std::vector<double> pt{t - s, 0.6};
          std::vector<int> al{alpha[0], alpha[1]};
          return hermite_fn_multi(al, pt);
        },
        0.0, t, 1e-12);
    // Left-endpoint rule: O(dt) accuracy.
    CHECK(std::abs(g[r] - want) <= 5.0 * dt + 1e-8);
  }

  // t -> 0 gives the zero vector.
  Eigen::VectorXd g0 = noise_integral(e.states[0], e.dt, m, 0.0);
  CHECK(g0.norm() == 0.0);
}

TEST_CASE("noise integrals are bounded linearly in the mode degree") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  SimOptions opts;
  opts.keep_states = false;
  double prev_ratio = -1.0;
  for (int m : {4, 8, 16}) {
    opts.noise_degree = m;
    PathEnsemble e = simulate_paths(spec, 0.25, x, 500, 1e-3, 99, opts);
    double mx = e.g_sqnorm.maxCoeff();
    double ratio = mx / m;
    CHECK(ratio < 1.0);  // |g|^2 <= a m + b with a small constant here
    if (prev_ratio > 0) CHECK(ratio < 2.0 * prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("t = 0 returns the initial datum exactly") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.7;
  FkParams params;
  params.noise_degree = 2;
  params.coeff_order_cap = 2;
  FkPoint pt = fk_solve(spec, 0.0, x, params);
  CHECK(pt.value.size() == 1);
  CHECK(expectation(pt.value) == doctest::Approx(std::exp(-0.5 * 0.49)).epsilon(1e-15));
}

TEST_CASE("zero-noise heat solution matches the closed form within 3 SE") {
  SdeSpec spec = heat_gaussian_spec();
  FkParams params;
  params.noise_degree = -1;
  params.coeff_order_cap = 0;
  params.n_paths = 20000;
  params.dt = 1e-3;
  params.seed = 71;
  for (double xx : {0.0, 1.0}) {
    Eigen::VectorXd x(1);
    x << xx;
    FkPoint pt = fk_solve(spec, 0.25, x, params);
    double want = std::exp(-xx * xx / (2.0 * 1.25)) / std::sqrt(1.25);
    double se = pt.coeff_stderr(MultiIndex{});
    REQUIRE(se > 0.0);
    CHECK(std::abs(expectation(pt.value) - want) <= 3.0 * se);
  }
}

TEST_CASE("fk determinism: same seed and params give identical coefficients") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  FkParams params;
  params.noise_degree = 2;
  params.coeff_order_cap = 2;
  params.n_paths = 2000;
  params.dt = 0.005;
  params.seed = 5;
  params.threads = 1;
  FkPoint a = fk_solve(spec, 0.2, x, params);
  params.threads = 2;
  FkPoint b = fk_solve(spec, 0.2, x, params);
  CHECK(a.value == b.value);  // bit-identical regardless of worker count
}

TEST_CASE("wick order-0 equals the noise-free expectation estimator") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  FkParams params;
  params.coeff_order_cap = 1;
  params.n_paths = 4000;
  params.dt = 0.005;
  params.seed = 17;
  params.noise_degree = 4;
  FkPoint wickpt = fk_solve_wick(spec, 0.2, x, params);
  params.noise_degree = -1;
  params.coeff_order_cap = 0;
  FkPoint plain = fk_solve(spec, 0.2, x, params);
  // Same seed, same paths: the wick order-0 estimator is E[f(X_t)] exactly.
  CHECK(expectation(wickpt.value) == doctest::Approx(expectation(plain.value)).epsilon(1e-13));
}

TEST_CASE("generalized order-0 carries the e^{|g|^2/2} reweighting") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  FkParams params;
  params.coeff_order_cap = 1;
  params.n_paths = 4000;
  params.dt = 0.005;
  params.seed = 23;
  params.noise_degree = 4;
  FkPoint u = fk_solve(spec, 0.2, x, params);
  FkPoint v = fk_solve_wick(spec, 0.2, x, params);
  CHECK(expectation(u.value) > expectation(v.value));  // weights >= 1, f >= 0

  // Per-path identity: ratio equals the reweighted ensemble mean computed
  // independently from a materialized ensemble.
  SimOptions opts;
  opts.keep_states = false;
  opts.noise_degree = 4;
  PathEnsemble e = simulate_paths(spec, 0.2, x, params.n_paths, params.dt, params.seed, opts);
  double num = 0.0, den = 0.0;
  for (int p = 0; p < e.n_paths; ++p) {
    double f = spec.initial(e.terminal.row(p).transpose());
    num += f * std::exp(0.5 * e.g_sqnorm[p]);
    den += f;
  }
  double ratio_ensemble = num / den;
  double ratio_fk = expectation(u.value) / expectation(v.value);
  CHECK(ratio_fk == doctest::Approx(ratio_ensemble).epsilon(1e-10));
}

TEST_CASE("coarse time grids are flagged as budget-infeasible") {
  SdeSpec spec = pathwise_exp_spec();
  FkParams params;
  params.noise_degree = 2;
  params.coeff_order_cap = 3;
  params.n_paths = 4;
  params.dt = 1e-3;
  std::vector<double> times, xs;
  for (int k = -2; k <= 2; ++k) times.push_back(0.2 + 0.04 * k);  // FD error >> dt bias
  for (int k = -2; k <= 2; ++k) xs.push_back(0.3 + 0.25 * k);
  ResidualReport rep = residual(spec, params, times, xs, 2);
  CHECK_FALSE(rep.grid_ok);
}

TEST_CASE("wick solution S-transform matches the path-wise exponential average") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  const double t = 0.2;
  FkParams params;
  params.noise_degree = 4;
  params.coeff_order_cap = 3;
  params.n_paths = 4000;
  params.dt = 0.002;
  params.seed = 31;
  FkPoint v = fk_solve_wick(spec, t, x, params);
  int K = static_cast<int>(modes_up_to_degree(2, 4));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(K);
  for (int j = 0; j < 5; ++j) h[j] = 0.1;
  double s_coeff = s_transform(v.value, h);

  // Same seed materializes the same paths; recompute E[f e^{<h, g>}].
  SimOptions opts;
  opts.keep_states = false;
  opts.noise_degree = 4;
  PathEnsemble e = simulate_paths(spec, t, x, params.n_paths, params.dt, params.seed, opts);
  double sum = 0.0, sumsq = 0.0;
  for (int p = 0; p < e.n_paths; ++p) {
    double f = spec.initial(e.terminal.row(p).transpose());
    double val = f * std::exp(h.dot(e.noise_integrals.row(p)));
    sum += val;
    sumsq += val * val;
  }
  double mean = sum / e.n_paths;
  double se = std::sqrt((sumsq - sum * sum / e.n_paths) / (e.n_paths - 1) / e.n_paths);
  // Identical paths: the only gap is the order cap truncation of the
  // exponential series, far below the Monte-Carlo scale.
  CHECK(std::abs(s_coeff - mean) <= 3.0 * se + 1e-6);
}

TEST_CASE("negative control: wick-coupled residual does not vanish for the "
          "generalized solution") {
  // sigma = 0, b = 0: u(t,x) = f(x) exp(int W_m) is deterministic and
  // satisfies u_t = u . W_m to O(dt) with the POINTWISE product. Replacing
  // the product by the Wick product leaves the order-0 cross term
  // sum_j u_{e_j} W_j unbalanced, and the defect grows with the level m.
  SdeSpec spec = pathwise_exp_spec();
  const double tc = 0.2, dt = 1e-3, dgrid = 2.0 * dt;
  Eigen::VectorXd x(1);
  x << 0.3;
  double prev_defect = 0.0;
  for (int m : {2, 4}) {
    FkParams params;
    params.noise_degree = m;
    params.coeff_order_cap = 3;
    params.n_paths = 4;
    params.dt = dt;
    params.seed = 1;
    auto solve_at = [&](double t) { return fk_solve(spec, t, x, params).value; };
    ChaosVector up = solve_at(tc + dgrid);
    ChaosVector um = solve_at(tc - dgrid);
    ChaosVector u0 = solve_at(tc);
    ChaosVector ut = (1.0 / (2.0 * dgrid)) * (up - um);
    int K = static_cast<int>(modes_up_to_degree(2, m));
    Eigen::VectorXd pt(2);
    pt << tc, x[0];
    ChaosVector w = white_noise(BasisLayout{2, K, 1}, pt, K - 1);
    ChaosVector r_mul = project_order(ut - mul(u0, w), 2);
    ChaosVector r_wick = project_order(ut - wick(u0, w), 2);
    double n_mul = norm(r_mul, 0);
    double n_wick = norm(r_wick, 0);
    CHECK(n_mul <= 2.0 * dt);
    CHECK(n_wick > 20.0 * n_mul);
    CHECK(n_wick > prev_defect);  // grows with the noise level
    prev_defect = n_wick;
  }
}

TEST_CASE("uniqueness probe: same seed exact zero, twin seeds associated") {
  SdeSpec spec = heat_gaussian_spec();
  Eigen::VectorXd x(1);
  x << 0.0;
  FkParams params;
  params.coeff_order_cap = 1;
  params.n_paths = 20000;
  params.dt = 0.005;

  UniquenessReport same = uniqueness_probe(spec, 0.2, x, 6, {9, 9}, params);
  CHECK(same.assoc.associated);
  for (double p : same.assoc.pairings) CHECK(p == 0.0);

  UniquenessReport twin = uniqueness_probe(spec, 0.2, x, 6, {9, 10}, params);
  CHECK(twin.assoc.associated);

  // Mismatched truncations: a sequence stuck at noise degree 0 is not
  // associated to the full one (the e^{|g|^2/2} weights differ beyond the
  // paired Monte-Carlo error, which common random numbers make tiny).
  std::vector<FkPoint> pa, pb;
  GenSequence su = fk_solution_sequence(spec, 0.2, x, 6, params, &pa);
  FkParams stuck = params;
  stuck.noise_degree = 0;
  GenSequence sv;
  sv.meta = "stuck";
  for (int m = 0; m <= 6; ++m) {
    FkPoint pt = fk_solve(spec, 0.2, x, stuck);
    sv.terms.push_back(pt.value);
    pb.push_back(pt);
  }
  double worst_se = 0.0;
  for (int m = 5; m <= 6; ++m)
    worst_se = std::max(worst_se, std::hypot(pa[m].coeff_stderr(MultiIndex{}),
                                             pb[m].coeff_stderr(MultiIndex{})));
  ChaosVector test(BasisLayout{2, 1, 0});
  test.set_coeff(MultiIndex{}, 1.0);
  auto rep = associated_limit(su, sv, test, 3.0 * worst_se);
  CHECK_FALSE(rep.associated);
}
