#include "wnc/sde.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "wnc/hermite.hpp"

namespace wnc {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
  // Two mixing rounds decorrelate (seed, path) pairs.
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (path * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
  state_ = splitmix64(s);
}

std::uint64_t PathRng::next() { return splitmix64(state_); }

double PathRng::uniform() {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double PathRng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

CoefficientField zero_field() {
  return {"zero", [](const Eigen::VectorXd&) { return 0.0; }};
}

CoefficientField constant_field(double c) {
  return {"constant(" + std::to_string(c) + ")", [c](const Eigen::VectorXd&) { return c; }};
}

CoefficientField linear_field(const Eigen::VectorXd& coeff) {
  return {"linear", [coeff](const Eigen::VectorXd& x) { return coeff.dot(x); }};
}

CoefficientField gaussian_bump_field() {
  return {"gaussian-bump",
          [](const Eigen::VectorXd& x) { return std::exp(-0.5 * x.squaredNorm()); }};
}

CoefficientField trig_field() {
  return {"trig", [](const Eigen::VectorXd& x) {
            double v = 1.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::cos(x[i]);
            return v;
          }};
}

Eigen::VectorXd SdeSpec::drift_at(const Eigen::VectorXd& x) const {
  Eigen::VectorXd b(dim_space);
  for (int i = 0; i < dim_space; ++i) b[i] = drift[i](x);
  return b;
}

Eigen::MatrixXd SdeSpec::sigma_at(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd s(dim_space, dim_space);
  for (int i = 0; i < dim_space; ++i)
    for (int j = 0; j < dim_space; ++j) s(i, j) = sigma[i][j](x);
  return s;
}

void spot_check_diffusion(const SdeSpec& spec, const std::vector<Eigen::VectorXd>& states,
                          double tol) {
  for (const auto& x : states) {
    Eigen::MatrixXd s = spec.sigma_at(x);
    Eigen::MatrixXd a = s * s.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.eigenvalues().minCoeff() < -tol)
      throw std::runtime_error("spot_check_diffusion: sigma sigma^T not PSD at a sampled state");
  }
}

namespace {

SdeSpec one_dim_spec(std::string name, CoefficientField b, CoefficientField s,
                     CoefficientField f) {
  SdeSpec spec;
  spec.name = std::move(name);
  spec.dim_space = 1;
  spec.drift = {std::move(b)};
  spec.sigma = {{std::move(s)}};
  spec.initial = std::move(f);
  return spec;
}

}  // namespace

SdeSpec heat_gaussian_spec() {
  return one_dim_spec("heat-gaussian", zero_field(), constant_field(1.0),
                      gaussian_bump_field());
}

SdeSpec heat_gaussian_2d_spec() {
  SdeSpec spec;
  spec.name = "heat-gaussian-2d";
  spec.dim_space = 2;
  spec.drift = {zero_field(), zero_field()};
  spec.sigma = {{constant_field(1.0), zero_field()}, {zero_field(), constant_field(1.0)}};
  spec.initial = gaussian_bump_field();
  return spec;
}

SdeSpec ou_spec() {
  Eigen::VectorXd c(1);
  c << -1.0;
  return one_dim_spec("ou", linear_field(c), constant_field(1.0), gaussian_bump_field());
}

SdeSpec pathwise_exp_spec() {
  return one_dim_spec("pathwise-exp", zero_field(), zero_field(), gaussian_bump_field());
}

SdeSpec constant_drift_spec(double b) {
  return one_dim_spec("constant-drift", constant_field(b), zero_field(),
                      gaussian_bump_field());
}

PathEnsemble simulate_paths(const SdeSpec& spec, double t, const Eigen::VectorXd& x, int n,
                            double dt, std::uint64_t seed, const SimOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("simulate_paths: horizon must be positive");
  if (!(dt <= t / 10.0)) throw std::invalid_argument("simulate_paths: need dt <= t/10");
  if (n < 100) throw std::invalid_argument("simulate_paths: need at least 100 paths");
  if (x.size() != spec.dim_space)
    throw std::invalid_argument("simulate_paths: start point dimension mismatch");

  const int l = spec.dim_space;
  const int steps = static_cast<int>(std::llround(t / dt));
  const double h = t / steps;

  PathEnsemble e;
  e.n_paths = n;
  e.dt = h;
  e.horizon = t;
  e.seed = seed;
  e.steps = steps;
  e.noise_degree = opts.noise_degree;
  if (opts.keep_states) {
    double bytes = static_cast<double>(n) * (steps + 1) * l * 8.0;
    if (bytes > 2e9)
      throw std::invalid_argument(
          "simulate_paths: state storage too large; pass keep_states = false");
    e.states.resize(n);
  }
  e.terminal.resize(n, l);

  const int d = 1 + l;
  std::int64_t n_modes = opts.noise_degree >= 0 ? modes_up_to_degree(d, opts.noise_degree) : 0;
  const ModeTable* table = nullptr;
  ModeTable local_table(1, 0);
  if (opts.noise_degree >= 0) {
    local_table = ModeTable(d, opts.noise_degree);
    table = &local_table;
    e.noise_integrals.resize(n, n_modes);
    e.g_sqnorm.resize(n);
  }

  Eigen::VectorXd state(l), b(l), dB(l), point(d), modes_at(n_modes), g(n_modes);
  Eigen::MatrixXd s(l, l);
  for (int p = 0; p < n; ++p) {
    PathRng rng(seed, static_cast<std::uint64_t>(p));
    state = x;
    if (opts.keep_states) {
      e.states[p].resize(steps + 1, l);
      e.states[p].row(0) = state.transpose();
    }
    if (table) g.setZero();
    for (int i = 0; i < steps; ++i) {
      if (table) {
        point[0] = t - i * h;
        point.tail(l) = state;
        table->eval(std::span<const double>(point.data(), d), modes_at);
        g += h * modes_at;
      }
      b = spec.drift_at(state);
      s = spec.sigma_at(state);
      for (int k = 0; k < l; ++k) dB[k] = std::sqrt(h) * rng.normal();
      state += b * h + s * dB;
      if (!state.allFinite())
        throw std::runtime_error("simulate_paths: non-finite state (path " +
                                 std::to_string(p) + ", step " + std::to_string(i) + ")");
      if (opts.keep_states) e.states[p].row(i + 1) = state.transpose();
    }
    e.terminal.row(p) = state.transpose();
    if (table) {
      e.noise_integrals.row(p) = g.transpose();
      e.g_sqnorm[p] = g.squaredNorm();
    }
  }
  return e;
}

Eigen::VectorXd noise_integral(const Eigen::MatrixXd& path_states, double dt, int m,
                               double t) {
  const int l = static_cast<int>(path_states.cols());
  const int steps = static_cast<int>(path_states.rows()) - 1;
  if (steps * dt < t - 1e-9 * std::max(1.0, t))
    throw std::invalid_argument("noise_integral: path not defined on [0, t]");
  const int d = 1 + l;
  ModeTable table(d, m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(table.size());
  Eigen::VectorXd point(d), modes_at(table.size());
  int use_steps = std::min(steps, static_cast<int>(std::llround(t / dt)));
  for (int i = 0; i < use_steps; ++i) {
    point[0] = t - i * dt;
    point.tail(l) = path_states.row(i).transpose();
    table.eval(std::span<const double>(point.data(), d), modes_at);
    g += dt * modes_at;
  }
  return g;
}

}  // namespace wnc
