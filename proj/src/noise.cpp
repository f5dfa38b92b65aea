#include "wnc/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wnc/hermite.hpp"
#include "wnc/products.hpp"
#include "wnc/quadrature.hpp"

namespace wnc {

ChaosVector white_noise(BasisLayout layout, const Eigen::VectorXd& x, int m) {
  if (x.size() != layout.dim) throw std::invalid_argument("white_noise: dimension mismatch");
  if (m < 0 || m >= layout.mode_cap)
    throw std::invalid_argument("white_noise: level must satisfy 0 <= m < mode_cap");
  ChaosVector w(layout);
  std::vector<double> pt(x.data(), x.data() + x.size());
  for (int j = 0; j <= m; ++j) {
    auto alpha = mode_unrank(layout.dim, j);
    double v = hermite_fn_multi(alpha, pt);
    if (v != 0.0) w.set_coeff(MultiIndex::unit(j), v);
  }
  return w;
}

WickDecomposition white_noise_squared(BasisLayout layout, const Eigen::VectorXd& x, int m) {
  if (layout.order_cap < 2)
    throw std::invalid_argument("white_noise_squared: caps must admit order 2");
  ChaosVector w = white_noise(layout, x, m);
  WickDecomposition d;
  d.square = mul(w, w);
  d.wick_part = wick(w, w);
  d.kernel_diagonal = 0.0;
  for (const auto& [mi, c] : w.coeffs()) d.kernel_diagonal += c * c;
  ChaosVector diff = d.square - d.wick_part;
  d.residual = 0.0;
  for (const auto& [mi, c] : diff.coeffs()) {
    double expect = mi.empty() ? d.kernel_diagonal : 0.0;
    d.residual = std::max(d.residual, std::abs(c - expect));
  }
  if (diff.coeff(MultiIndex{}) == 0.0)
    d.residual = std::max(d.residual, std::abs(d.kernel_diagonal));
  return d;
}

Eigen::VectorXd brownian_coeffs(double t, int j_modes, double tol) {
  if (t < 0.0) throw std::invalid_argument("brownian_coeffs: negative time");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(j_modes);
  for (int j = 0; j < j_modes; ++j) {
    b[j] = adaptive_simpson([j](double s) { return hermite_fn(j, s); }, 0.0, t, tol);
    if (!std::isfinite(b[j]))
      throw std::runtime_error("brownian_coeffs: quadrature failed to converge");
  }
  return b;
}

ChaosVector brownian(BasisLayout layout, double t, int j_modes) {
  if (layout.dim != 1) throw std::invalid_argument("brownian: d = 1 layouts only");
  if (j_modes > layout.mode_cap)
    throw std::invalid_argument("brownian: j_modes exceeds mode cap");
  return from_first_order(layout, brownian_coeffs(t, j_modes));
}

double hermite_variance_poly(int n, double t, double x) {
  if (t <= 0.0) throw std::invalid_argument("hermite_variance_poly: t must be positive");
  return std::pow(t, 0.5 * n) * hermite_poly(n, x / std::sqrt(t));
}

double gaussian_density(double a, double t) {
  return std::exp(-a * a / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
}

ChaosVector donsker_delta(double a, double t, int order_cap, int j_modes) {
  if (t <= 0.0) throw std::invalid_argument("donsker_delta: t must be positive");
  BasisLayout layout{1, j_modes, order_cap};
  Eigen::VectorXd g = brownian_coeffs(t, j_modes);
  double pt = gaussian_density(a, t);
  auto scale = [&](int n) {
    return pt * std::pow(t, -static_cast<double>(n)) * hermite_variance_poly(n, t, a);
  };
  return power_series(layout, g, scale);
}

}  // namespace wnc
