#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wnc/basis.hpp"

namespace wnc {

/// Deterministic per-path random stream derived from (seed, path index);
/// splitmix64 underneath, standard normals via Box-Muller.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path);
  double normal();
  double uniform();  // in (0, 1]

 private:
  std::uint64_t next();
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

/// Named scalar coefficient field R^l -> R; the name is echoed into run
/// manifests.
struct CoefficientField {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> fn;

  double operator()(const Eigen::VectorXd& x) const { return fn(x); }
};

CoefficientField zero_field();
CoefficientField constant_field(double c);
/// f(x) = sum_i coeff_i x_i.
CoefficientField linear_field(const Eigen::VectorXd& coeff);
/// f(x) = exp(-|x|^2 / 2).
CoefficientField gaussian_bump_field();
/// f(x) = prod_i cos(x_i).
CoefficientField trig_field();

/// dX = sigma(X) dB + b(X) dt with initial datum f; all coefficient fields
/// C_b^2 by the caller's choice of families.
struct SdeSpec {
  std::string name;
  int dim_space = 1;                                 // l
  std::vector<CoefficientField> drift;               // b_i, size l
  std::vector<std::vector<CoefficientField>> sigma;  // sigma_{ij}, l x l
  CoefficientField initial;                          // f

  Eigen::VectorXd drift_at(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd sigma_at(const Eigen::VectorXd& x) const;
};

/// sigma sigma^T positive semidefinite at the sampled states; throws when
/// the check fails.
void spot_check_diffusion(const SdeSpec& spec, const std::vector<Eigen::VectorXd>& states,
                          double tol = 1e-10);

// Presets.
SdeSpec heat_gaussian_spec();           // l = 1: b = 0, sigma = 1, f = gaussian bump
SdeSpec heat_gaussian_2d_spec();        // l = 2 twin
SdeSpec ou_spec();                      // b = -x, sigma = 1, f = gaussian bump
SdeSpec pathwise_exp_spec();            // b = 0, sigma = 0, f = gaussian bump
SdeSpec constant_drift_spec(double b);  // sigma = 0, f = gaussian bump

struct SimOptions {
  bool keep_states = true;
  int noise_degree = -1;  // total-degree cap m of the noise modes; -1 disables
};

/// Euler-Maruyama sample paths of the auxiliary SDE with per-path
/// noise-integral vectors g_alpha = int_0^t eta_alpha(t-s, X(s,x)) ds
/// (left-endpoint rule on the same grid).
struct PathEnsemble {
  int n_paths = 0;
  double dt = 0.0;  // effective step (horizon / steps)
  double horizon = 0.0;
  std::uint64_t seed = 0;
  int steps = 0;
  int noise_degree = -1;

  std::vector<Eigen::MatrixXd> states;  // per path (steps+1) x l, when kept
  Eigen::MatrixXd terminal;             // n x l
  Eigen::MatrixXd noise_integrals;      // n x K over 1+l variate modes
  Eigen::VectorXd g_sqnorm;             // |g|^2 per path
};

PathEnsemble simulate_paths(const SdeSpec& spec, double t, const Eigen::VectorXd& x, int n,
                            double dt, std::uint64_t seed, const SimOptions& opts = {});

/// Noise-integral vector of one path given its state series; modes are the
/// (1+l)-variate Hermite functions of total degree <= m, first coordinate
/// is time.
Eigen::VectorXd noise_integral(const Eigen::MatrixXd& path_states, double dt, int m,
                               double t);

}  // namespace wnc
