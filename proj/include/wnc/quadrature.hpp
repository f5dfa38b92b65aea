#pragma once

#include <Eigen/Core>
#include <functional>

namespace wnc {

/// Nodes/weights integrating polynomials of degree < 2*order exactly
/// against the rule's weight function.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // positive
  int order = 0;
};

/// Gauss-Hermite rule for the probabilists' weight e^{-x^2/2}
/// (total mass sqrt(2 pi)); Golub-Welsch on the Jacobi matrix.
Quadrature gauss_hermite_prob(int order);

/// Gauss-Legendre rule on [-1, 1].
Quadrature gauss_legendre(int order);

template <typename F>
double integrate(const Quadrature& q, F&& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
  return s;
}

/// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48);

/// Composite Gauss-Legendre over n_panels equal panels of [a, b].
double panel_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                            int points_per_panel, int n_panels);

}  // namespace wnc
