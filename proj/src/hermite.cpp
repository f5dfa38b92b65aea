#include "wnc/hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace wnc {

namespace {
constexpr double kTwoPiQuarterRoot = 0.63161877774606470;  // (2 pi)^{-1/4}
constexpr double kDiagonalRadius = 0.05;
}  // namespace

double hermite_poly(int j, double x) {
  if (j < 0) throw std::invalid_argument("hermite_poly: negative degree");
  if (!std::isfinite(x)) throw std::invalid_argument("hermite_poly: non-finite x");
  double hm1 = 0.0;  // h_{k-1}
  double h = 1.0;    // h_k
  for (int k = 0; k < j; ++k) {
    double hp1 = x * h - k * hm1;
    hm1 = h;
    h = hp1;
  }
  return h;
}

double hermite_fn(int j, double x) {
  if (j < 0) throw std::invalid_argument("hermite_fn: negative degree");
  double em1 = 0.0;
  double e = kTwoPiQuarterRoot * std::exp(-0.25 * x * x);  // eta_0
  for (int k = 0; k < j; ++k) {
    double ep1 = (x * e - std::sqrt(static_cast<double>(k)) * em1) / std::sqrt(k + 1.0);
    em1 = e;
    e = ep1;
  }
  return e;
}

void hermite_fn_series(int jmax, double x, std::span<double> out) {
  if (jmax < 0) throw std::invalid_argument("hermite_fn_series: negative degree");
  if (out.size() < static_cast<std::size_t>(jmax) + 1)
    throw std::invalid_argument("hermite_fn_series: output span too small");
  out[0] = kTwoPiQuarterRoot * std::exp(-0.25 * x * x);
  if (jmax == 0) return;
  out[1] = x * out[0];
  for (int k = 1; k < jmax; ++k)
    out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) / std::sqrt(k + 1.0);
}

double kernel_sum(int n, double x, double t) {
  if (n < 0) throw std::invalid_argument("kernel_sum: negative cutoff");
  if (std::abs(x - t) < kDiagonalRadius) {
    std::vector<double> ex(n + 2), et(n + 2);
    hermite_fn_series(n + 1, x, ex);
    hermite_fn_series(n + 1, t, et);
    double s = 0.0;
    for (int j = 0; j <= n; ++j) s += ex[j] * et[j];
    return s;
  }
  std::vector<double> ex(n + 2), et(n + 2);
  hermite_fn_series(n + 1, x, ex);
  hermite_fn_series(n + 1, t, et);
  return std::sqrt(n + 1.0) * (ex[n + 1] * et[n] - et[n + 1] * ex[n]) / (x - t);
}

HermiteGrid::HermiteGrid(Eigen::VectorXd pts, int degree)
    : points(std::move(pts)), max_degree(degree) {
  if (max_degree < 0) throw std::invalid_argument("HermiteGrid: max_degree < 0");
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw std::invalid_argument("HermiteGrid: non-finite point");
    if (i > 0 && points[i] <= points[i - 1])
      throw std::invalid_argument("HermiteGrid: points not strictly increasing");
  }
}

Eigen::MatrixXd HermiteGrid::tabulate() const {
  Eigen::MatrixXd table(max_degree + 1, points.size());
  std::vector<double> col(max_degree + 1);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    hermite_fn_series(max_degree, points[i], col);
    for (int j = 0; j <= max_degree; ++j) table(j, i) = col[j];
  }
  return table;
}

}  // namespace wnc
