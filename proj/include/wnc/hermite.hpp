#pragma once

#include <Eigen/Core>
#include <span>

namespace wnc {

/// Probabilists' Hermite polynomial h_j(x), three-term recurrence
/// h_{j+1} = x h_j - j h_{j-1}.
double hermite_poly(int j, double x);

/// Hermite function eta_j(x) = (sqrt(2 pi) j!)^{-1/2} e^{-x^2/4} h_j(x),
/// evaluated by the normalized recurrence
///   eta_{j+1} = (x eta_j - sqrt(j) eta_{j-1}) / sqrt(j+1),
/// which never forms j! and stays in range for j <= 512, |x| <= 50.
double hermite_fn(int j, double x);

/// Fills out[0..jmax] with eta_0(x) .. eta_jmax(x) in one recurrence pass.
void hermite_fn_series(int jmax, double x, std::span<double> out);

/// Kernel sum K_n(x,t) = sum_{j=0}^{n} eta_j(x) eta_j(t). Uses the
/// Christoffel-Darboux closed form
///   sqrt(n+1) (eta_{n+1}(x) eta_n(t) - eta_{n+1}(t) eta_n(x)) / (x - t)
/// away from the diagonal and the direct sum when |x - t| < 0.05.
double kernel_sum(int n, double x, double t);

/// Evaluation abscissae plus a degree cap; tabulates Hermite functions on
/// the grid.
struct HermiteGrid {
  Eigen::VectorXd points;  // finite, strictly increasing
  int max_degree = 0;

  HermiteGrid(Eigen::VectorXd pts, int degree);

  /// (max_degree+1) x points.size() table of eta_j(points[i]).
  Eigen::MatrixXd tabulate() const;
};

}  // namespace wnc
