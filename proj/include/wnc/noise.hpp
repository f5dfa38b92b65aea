#pragma once

#include <Eigen/Core>

#include "wnc/chaos.hpp"

namespace wnc {

/// Truncated white noise at x in R^d: the order-1 vector with
/// c_{e_j} = eta_j(x) for flat modes j = 0..m of the graded enumeration.
ChaosVector white_noise(BasisLayout layout, const Eigen::VectorXd& x, int m);

struct WickDecomposition {
  ChaosVector square;      // W_m(x)^2 as a pointwise product
  ChaosVector wick_part;   // W_m(x) <> W_m(x)
  double kernel_diagonal;  // sum_{j<=m} eta_j(x)^2
  double residual;         // max |square - wick_part - diag H_0| coefficient
};

/// W_m(x)^2 together with its Wick-plus-constant decomposition.
WickDecomposition white_noise_squared(BasisLayout layout, const Eigen::VectorXd& x, int m);

/// Hermite coefficients b_j = int_0^t eta_j(s) ds for j < j_modes, by
/// adaptive panel quadrature (the integrand is compactly supported, so the
/// Gauss-Hermite rule does not apply).
Eigen::VectorXd brownian_coeffs(double t, int j_modes, double tol = 1e-10);

/// B(t) = <., 1_[0,t]> truncated to j_modes modes (d = 1 layouts only).
ChaosVector brownian(BasisLayout layout, double t, int j_modes);

/// Hermite polynomial with variance t: H_{n,t}(x) = t^{n/2} h_n(x / sqrt t).
double hermite_variance_poly(int n, double t, double x);

/// Donsker delta delta_a(B_t) with the Gaussian density prefactor:
/// order-n part p_t(a) t^{-n} H_{n,t}(a) / n! applied to the n-th power of
/// the truncated indicator coefficients. Caps: j_modes modes, order_cap
/// chaos orders.
ChaosVector donsker_delta(double a, double t, int order_cap, int j_modes);

/// Gaussian density p_t(a) = (2 pi t)^{-1/2} e^{-a^2/(2t)}.
double gaussian_density(double a, double t);

}  // namespace wnc
