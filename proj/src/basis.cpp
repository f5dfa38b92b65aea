#include "wnc/basis.hpp"

#include <stdexcept>

#include "wnc/hermite.hpp"

namespace wnc {

bool compatible(const BasisLayout& a, const BasisLayout& b) { return a.dim == b.dim; }

BasisLayout merged(const BasisLayout& a, const BasisLayout& b) {
  if (!compatible(a, b)) throw std::invalid_argument("merged: dimension mismatch");
  return {a.dim, std::max(a.mode_cap, b.mode_cap), std::max(a.order_cap, b.order_cap)};
}

std::int64_t compositions_count(int degree, int dim) {
  if (degree < 0) return 0;
  if (dim == 0) return degree == 0 ? 1 : 0;
  // C(degree + dim - 1, dim - 1), exact in int64 for the sizes in play
  std::int64_t c = 1;
  for (int i = 1; i <= dim - 1; ++i) c = c * (degree + i) / i;
  return c;
}

std::int64_t modes_up_to_degree(int dim, int degree) {
  if (degree < 0) return 0;
  std::int64_t c = 1;  // C(degree + dim, dim)
  for (int i = 1; i <= dim; ++i) c = c * (degree + i) / i;
  return c;
}

std::vector<int> mode_unrank(int dim, std::int64_t mode) {
  if (dim < 1 || mode < 0) throw std::invalid_argument("mode_unrank: bad arguments");
  int degree = 0;
  while (modes_up_to_degree(dim, degree) <= mode) ++degree;
  std::int64_t r = mode - modes_up_to_degree(dim, degree - 1);
  std::vector<int> alpha(dim, 0);
  // Within a degree block: first coordinate descending, recurse on the rest.
  int rem = degree;
  for (int i = 0; i < dim - 1; ++i) {
    for (int a = rem; a >= 0; --a) {
      std::int64_t block = compositions_count(rem - a, dim - 1 - i);
      if (r < block) {
        alpha[i] = a;
        rem -= a;
        break;
      }
      r -= block;
    }
  }
  alpha[dim - 1] = rem;
  return alpha;
}

std::int64_t mode_rank(std::span<const int> alpha) {
  int dim = static_cast<int>(alpha.size());
  if (dim < 1) throw std::invalid_argument("mode_rank: empty multi-index");
  int degree = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("mode_rank: negative entry");
    degree += a;
  }
  std::int64_t r = modes_up_to_degree(dim, degree - 1);
  int rem = degree;
  for (int i = 0; i < dim - 1; ++i) {
    for (int a = rem; a > alpha[i]; --a) r += compositions_count(rem - a, dim - 1 - i);
    rem -= alpha[i];
  }
  return r;
}

int mode_degree(int dim, std::int64_t mode) {
  int degree = 0;
  while (modes_up_to_degree(dim, degree) <= mode) ++degree;
  return degree;
}

double hermite_fn_multi(std::span<const int> alpha, std::span<const double> x) {
  if (alpha.size() != x.size())
    throw std::invalid_argument("hermite_fn_multi: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) v *= hermite_fn(alpha[i], x[i]);
  return v;
}

ModeTable::ModeTable(int dim, int degree_cap) : dim_(dim), degree_cap_(degree_cap) {
  if (dim < 1 || degree_cap < 0) throw std::invalid_argument("ModeTable: bad arguments");
  std::int64_t n = modes_up_to_degree(dim, degree_cap);
  indices_.reserve(n);
  for (std::int64_t k = 0; k < n; ++k) indices_.push_back(mode_unrank(dim, k));
  work_.resize(static_cast<std::size_t>(degree_cap + 1) * dim);
}

void ModeTable::eval(std::span<const double> x, Eigen::VectorXd& out) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("ModeTable::eval: dimension mismatch");
  const int stride = degree_cap_ + 1;
  for (int i = 0; i < dim_; ++i)
    hermite_fn_series(degree_cap_, x[i], std::span<double>(work_.data() + i * stride, stride));
  out.resize(size());
  for (int k = 0; k < size(); ++k) {
    const auto& alpha = indices_[k];
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= work_[i * stride + alpha[i]];
    out[k] = v;
  }
}

}  // namespace wnc
