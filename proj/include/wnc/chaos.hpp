#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>

#include "wnc/basis.hpp"
#include "wnc/multi_index.hpp"

namespace wnc {

/// Norm index at which discarded coefficient mass is weighted when an
/// operation overflows the caps.
inline constexpr int kTailNormIndex = 1;

/// Truncated chaos expansion F = sum_alpha c_alpha H_alpha in Wick-Hermite
/// coordinates. Sparse table with deterministic (dense-lexicographic)
/// iteration order; immutable value semantics in practice. tail_mass
/// accumulates the weighted mass of coefficients dropped by cap overflows,
/// measured in the squared ||.||_{kTailNormIndex} metric.
class ChaosVector {
 public:
  ChaosVector() = default;
  explicit ChaosVector(BasisLayout layout) : layout_(layout) {}

  const BasisLayout& layout() const { return layout_; }
  const std::map<MultiIndex, double>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  double coeff(const MultiIndex& mi) const;
  /// Inserts/overwrites; zero values erase. Throws on cap violation.
  void set_coeff(const MultiIndex& mi, double value);
  /// Adds value at mi when it fits the caps and returns true; returns
  /// false (caller handles tail bookkeeping) otherwise.
  bool accumulate(const MultiIndex& mi, double value);
  bool fits(const MultiIndex& mi) const;

  double tail_mass() const { return tail_mass_; }
  void add_tail_mass(double m);

  int max_order() const;  // largest |alpha| present, 0 if empty

  friend bool operator==(const ChaosVector& a, const ChaosVector& b) {
    return a.layout_ == b.layout_ && a.coeffs_ == b.coeffs_;
  }

 private:
  BasisLayout layout_;
  std::map<MultiIndex, double> coeffs_;
  double tail_mass_ = 0.0;
};

struct NormReport {
  double value = 0.0;      // ||F||_p, +inf when saturated
  double log_value = 0.0;  // log ||F||_p, robust to overflow
  bool saturated = false;
};

/// ||F||_p^2 = sum_alpha alpha! e^{2p|alpha|} c_alpha^2. Negative p gives
/// the dual norms.
NormReport norm_report(const ChaosVector& f, int p);
double norm(const ChaosVector& f, int p);

/// Drops every alpha with |alpha| > m.
ChaosVector project_order(const ChaosVector& f, int m);
/// Drops every alpha with support outside modes {0..J-1}.
ChaosVector project_modes(const ChaosVector& f, int j_modes);

/// Duality pairing <<F, f>> = sum_alpha alpha! c_alpha d_alpha.
double pairing(const ChaosVector& f, const ChaosVector& g);

/// S(F)(phi) = sum_alpha c_alpha prod_j phi_hat_j^{alpha_j}.
double s_transform(const ChaosVector& f, const Eigen::VectorXd& phi_hat);

/// Order-zero coefficient.
double expectation(const ChaosVector& f);

/// I_1(g): c_{e_j} = g_j.
ChaosVector from_first_order(BasisLayout layout, const Eigen::VectorXd& g);

/// Coefficients c_alpha = scale(|alpha|) g^alpha / alpha! over the support
/// of g, |alpha| <= layout.order_cap. The Wick exponential is scale == 1;
/// the Donsker delta uses an order-dependent scale. tail_mass gets the
/// closed-form bound sum_{n > N} e^{2 kTailNormIndex n} scale(n)^2 |g|^{2n}/n!.
ChaosVector power_series(BasisLayout layout, const Eigen::VectorXd& g,
                         const std::function<double(int)>& scale);

/// Wick exponential: c_alpha = g^alpha / alpha!.
ChaosVector wick_exp(BasisLayout layout, const Eigen::VectorXd& g);

/// Evaluates F as a polynomial in the Gaussian coordinates xi_j:
/// F(xi) = sum_alpha c_alpha prod_j h_{alpha_j}(xi_j).
double evaluate(const ChaosVector& f, const Eigen::VectorXd& xi);

/// Weighted squared mass a dropped coefficient contributes to tail_mass.
double dropped_mass_weight(const MultiIndex& mi, double value);

ChaosVector operator+(const ChaosVector& a, const ChaosVector& b);
ChaosVector operator-(const ChaosVector& a, const ChaosVector& b);
ChaosVector operator*(double s, const ChaosVector& a);
inline ChaosVector operator*(const ChaosVector& a, double s) { return s * a; }
inline ChaosVector operator-(const ChaosVector& a) { return -1.0 * a; }

/// Line-oriented text format: header "dim J N", then one row
/// "mode^power ... : coefficient" per entry; bit-exact round-trip.
std::string to_text(const ChaosVector& f);
ChaosVector chaos_from_text(const std::string& text);

}  // namespace wnc
