#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace wnc {

/// Caps shared by every coefficient table: spatial dimension d of the
/// underlying L^2(R^d) modes, number of retained Hermite modes J, and the
/// maximal chaos order N.
struct BasisLayout {
  int dim = 1;
  int mode_cap = 0;
  int order_cap = 0;

  friend bool operator==(const BasisLayout&, const BasisLayout&) = default;
};

bool compatible(const BasisLayout& a, const BasisLayout& b);  // same dim
BasisLayout merged(const BasisLayout& a, const BasisLayout& b);

/// Number of d-variate multi-indices with total degree == n.
std::int64_t compositions_count(int degree, int dim);
/// Number of d-variate multi-indices with total degree <= n; equals the
/// number of flat modes the graded enumeration assigns to degrees 0..n.
std::int64_t modes_up_to_degree(int dim, int degree);

/// Graded enumeration of N_0^dim: blocks of increasing total degree, a
/// fixed lexicographic order inside each block. Degree-monotone by
/// construction: rank k < l implies degree(k) <= degree(l).
std::vector<int> mode_unrank(int dim, std::int64_t mode);
std::int64_t mode_rank(std::span<const int> alpha);
int mode_degree(int dim, std::int64_t mode);

/// d-variate Hermite function eta_alpha(x) = prod_i eta_{alpha_i}(x_i).
double hermite_fn_multi(std::span<const int> alpha, std::span<const double> x);

/// Precomputed multi-indices for all modes of total degree <= degree_cap,
/// plus a workspace-based bulk evaluator (one 1-D recurrence pass per
/// coordinate, then products).
class ModeTable {
 public:
  ModeTable(int dim, int degree_cap);

  int dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<int>& index(int mode) const { return indices_[mode]; }

  /// out[k] = eta_{alpha(k)}(x) for every mode k in the table.
  void eval(std::span<const double> x, Eigen::VectorXd& out) const;

 private:
  int dim_;
  int degree_cap_;
  std::vector<std::vector<int>> indices_;
  mutable std::vector<double> work_;  // (degree_cap+1) x dim scratch
};

}  // namespace wnc
