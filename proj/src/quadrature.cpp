#include "wnc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wnc/hermite.hpp"

namespace wnc {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix with the given off-diagonal, weights mu0 * v0^2.
Quadrature golub_welsch(const Eigen::VectorXd& offdiag, double mu0, int order) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigensolver failed");
  Quadrature q;
  q.order = order;
  q.nodes = es.eigenvalues();
  q.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double v0 = es.eigenvectors()(0, i);
    q.weights[i] = mu0 * v0 * v0;
  }
  return q;
}

double simpson(double a, double fa, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = simpson(a, fa, flm, m, fm);
  double right = simpson(m, fm, frm, b, fb);
  double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol)
    return left + right + err / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

Quadrature gauss_hermite_prob(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite_prob: order < 1");
  Eigen::VectorXd off(order - 1);
  for (int j = 1; j < order; ++j) off[j - 1] = std::sqrt(static_cast<double>(j));
  Quadrature q = golub_welsch(off, std::sqrt(2.0 * M_PI), order);
  // The eigenvector route loses the extreme-node weights (first components
  // fall below machine precision). Recompute every weight through the
  // Christoffel function with the bounded Hermite-function recurrence:
  // w_i = e^{-x_i^2/2} / sum_{j<order} eta_j(x_i)^2.
  std::vector<double> eta(order);
  for (int i = 0; i < order; ++i) {
    const double x = q.nodes[i];
    hermite_fn_series(order - 1, x, eta);
    double k = 0.0;
    for (int j = 0; j < order; ++j) k += eta[j] * eta[j];
    q.weights[i] = std::exp(-0.5 * x * x) / k;
  }
  return q;
}

Quadrature gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order < 1");
  Eigen::VectorXd off(order - 1);
  for (int j = 1; j < order; ++j)
    off[j - 1] = j / std::sqrt(4.0 * j * j - 1.0);
  return golub_welsch(off, 2.0, order);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (!(b > a)) return b == a ? 0.0 : -adaptive_simpson(f, b, a, tol, max_depth);
  double fa = f(a);
  double fb = f(b);
  double m = 0.5 * (a + b);
  double fm = f(m);
  double whole = simpson(a, fa, fm, b, fb);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double panel_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                            int points_per_panel, int n_panels) {
  static thread_local int cached_order = -1;
  static thread_local Quadrature cached;
  if (cached_order != points_per_panel) {
    cached = gauss_legendre(points_per_panel);
    cached_order = points_per_panel;
  }
  double h = (b - a) / n_panels;
  double total = 0.0;
  for (int p = 0; p < n_panels; ++p) {
    double lo = a + p * h;
    double c = lo + 0.5 * h;
    double s = 0.0;
    for (Eigen::Index i = 0; i < cached.nodes.size(); ++i)
      s += cached.weights[i] * f(c + 0.5 * h * cached.nodes[i]);
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace wnc
