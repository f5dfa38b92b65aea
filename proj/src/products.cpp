#include "wnc/products.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace wnc {

namespace {

void flush_dropped(const std::map<MultiIndex, double>& dropped, ChaosVector& out) {
  double mass = 0.0;
  for (const auto& [mi, c] : dropped) mass += dropped_mass_weight(mi, c);
  if (mass > 0.0) out.add_tail_mass(mass);
}

void deposit(ChaosVector& out, std::map<MultiIndex, double>& dropped, const MultiIndex& mi,
             double v) {
  if (v == 0.0) return;
  if (!out.accumulate(mi, v)) dropped[mi] += v;
}

// lin[a][b][k] = k! C(a,k) C(b,k), exact integer arithmetic in doubles
// while it fits (a, b up to the order caps in play).
class LinearizationTable {
 public:
  explicit LinearizationTable(int max_ab) : max_ab_(max_ab) {
    binom_.assign(max_ab + 1, std::vector<double>(max_ab + 1, 0.0));
    for (int a = 0; a <= max_ab; ++a) {
      binom_[a][0] = 1.0;
      for (int k = 1; k <= a; ++k)
        binom_[a][k] = binom_[a - 1][k - 1] + (k <= a - 1 ? binom_[a - 1][k] : 0.0);
    }
    fact_.assign(max_ab + 1, 1.0);
    for (int k = 1; k <= max_ab; ++k) fact_[k] = fact_[k - 1] * k;
  }

  double operator()(int a, int b, int k) const {
    return fact_[k] * binom_[a][k] * binom_[b][k];
  }

 private:
  int max_ab_;
  std::vector<std::vector<double>> binom_;
  std::vector<double> fact_;
};

// Expands H_alpha H_beta over the shared modes and deposits
// c * prod_j lin(a_j, b_j, k_j) at alpha + beta - 2k.
void linearize_pair(const MultiIndex& alpha, const MultiIndex& beta, double c,
                    const LinearizationTable& lin, ChaosVector& out,
                    std::map<MultiIndex, double>& dropped) {
  std::vector<std::pair<int, std::pair<int, int>>> shared;  // mode -> (a,b)
  MultiIndex base;  // modes present in only one factor pass through directly
  {
    auto a = alpha.terms().begin();
    auto b = beta.terms().begin();
    while (a != alpha.terms().end() || b != beta.terms().end()) {
      int ma = a != alpha.terms().end() ? a->first : INT32_MAX;
      int mb = b != beta.terms().end() ? b->first : INT32_MAX;
      if (ma < mb) {
        base = base.plus(MultiIndex::unit(ma, a->second));
        ++a;
      } else if (mb < ma) {
        base = base.plus(MultiIndex::unit(mb, b->second));
        ++b;
      } else {
        shared.push_back({ma, {a->second, b->second}});
        ++a;
        ++b;
      }
    }
  }
  // Recursive expansion over k choices per shared mode.
  struct Rec {
    const std::vector<std::pair<int, std::pair<int, int>>>& shared;
    const LinearizationTable& lin;
    ChaosVector& out;
    std::map<MultiIndex, double>& dropped;
    void go(std::size_t pos, MultiIndex acc, double v) {
      if (pos == shared.size()) {
        deposit(out, dropped, acc, v);
        return;
      }
      auto [mode, ab] = shared[pos];
      auto [a, b] = ab;
      for (int k = 0; k <= std::min(a, b); ++k)
        go(pos + 1, acc.plus(MultiIndex::unit(mode, a + b - 2 * k)), v * lin(a, b, k));
    }
  };
  Rec rec{shared, lin, out, dropped};
  rec.go(0, base, c);
}

}  // namespace

ChaosVector wick(const ChaosVector& f, const ChaosVector& g) {
  if (!compatible(f.layout(), g.layout()))
    throw std::invalid_argument("wick: dimension mismatch");
  ChaosVector out(merged(f.layout(), g.layout()));
  std::map<MultiIndex, double> dropped;
  for (const auto& [a, ca] : f.coeffs())
    for (const auto& [b, cb] : g.coeffs()) deposit(out, dropped, a.plus(b), ca * cb);
  flush_dropped(dropped, out);
  return out;
}

ChaosVector mul(const ChaosVector& f, const ChaosVector& g) {
  if (!compatible(f.layout(), g.layout()))
    throw std::invalid_argument("mul: dimension mismatch");
  ChaosVector out(merged(f.layout(), g.layout()));
  int max_pow = 0;
  for (const auto& [a, ca] : f.coeffs())
    for (const auto& [m, p] : a.terms()) max_pow = std::max(max_pow, p);
  for (const auto& [b, cb] : g.coeffs())
    for (const auto& [m, p] : b.terms()) max_pow = std::max(max_pow, p);
  LinearizationTable lin(max_pow);
  std::map<MultiIndex, double> dropped;
  for (const auto& [a, ca] : f.coeffs())
    for (const auto& [b, cb] : g.coeffs()) linearize_pair(a, b, ca * cb, lin, out, dropped);
  flush_dropped(dropped, out);
  return out;
}

namespace {

// Dense symmetric tensors over a compact set of K modes; order-n tensor is
// a flat K^n array, entry at (i_1..i_n) = c_alpha(tuple) alpha! / n!.
struct DenseTensors {
  int K = 0;
  std::vector<Eigen::VectorXd> by_order;  // possibly empty per order
};

DenseTensors to_tensors(const ChaosVector& f, const std::vector<int>& modes) {
  const int K = static_cast<int>(modes.size());
  std::vector<int> local(modes.empty() ? 0 : modes.back() + 1, -1);
  for (int i = 0; i < K; ++i) local[modes[i]] = i;

  DenseTensors t;
  t.K = K;
  t.by_order.resize(f.max_order() + 1);
  for (const auto& [mi, c] : f.coeffs()) {
    int n = mi.order();
    auto& tensor = t.by_order[n];
    if (tensor.size() == 0) tensor = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(std::pow(K, n)));
    if (n == 0) {
      tensor[0] = c;
      continue;
    }
    // All tuples whose multiset equals mi get c * mi! / n!.
    double nf = 1.0;
    for (int i = 2; i <= n; ++i) nf *= i;
    double entry = c * mi.factorial() / nf;
    std::vector<int> tuple;
    tuple.reserve(n);
    for (const auto& [mode, pw] : mi.terms())
      for (int r = 0; r < pw; ++r) tuple.push_back(local[mode]);
    std::sort(tuple.begin(), tuple.end());
    do {
      Eigen::Index idx = 0;
      for (int v : tuple) idx = idx * K + v;
      tensor[idx] = entry;
    } while (std::next_permutation(tuple.begin(), tuple.end()));
  }
  return t;
}

}  // namespace

ChaosVector mul_contraction_oracle(const ChaosVector& f, const ChaosVector& g) {
  if (!compatible(f.layout(), g.layout()))
    throw std::invalid_argument("mul_contraction_oracle: dimension mismatch");
  std::set<int> mode_set;
  for (const auto& [mi, c] : f.coeffs())
    for (const auto& [m, p] : mi.terms()) mode_set.insert(m);
  for (const auto& [mi, c] : g.coeffs())
    for (const auto& [m, p] : mi.terms()) mode_set.insert(m);
  std::vector<int> modes(mode_set.begin(), mode_set.end());
  const int K = static_cast<int>(modes.size());
  const int combined = f.max_order() + g.max_order();
  if (combined > 6 || K > 8)
    throw InstanceTooLarge("mul_contraction_oracle: order " + std::to_string(combined) +
                           ", modes " + std::to_string(K) + " beyond the small-instance envelope");

  DenseTensors F = to_tensors(f, modes);
  DenseTensors G = to_tensors(g, modes);
  const int maxF = static_cast<int>(F.by_order.size()) - 1;
  const int maxG = static_cast<int>(G.by_order.size()) - 1;

  ChaosVector out(merged(f.layout(), g.layout()));
  std::map<MultiIndex, double> dropped;

  auto kpow = [&](int e) { return static_cast<Eigen::Index>(std::pow(std::max(K, 1), e)); };

  for (int j = 0; j <= maxF + maxG; ++j) {
    Eigen::VectorXd result = Eigen::VectorXd::Zero(kpow(j));
    bool any = false;
    for (int n = 0; n <= j; ++n) {
      int m = j - n;
      for (int k = 0;; ++k) {
        if (n + k > maxF || m + k > maxG) break;
        const auto& A = F.by_order[n + k];
        const auto& B = G.by_order[m + k];
        if (A.size() == 0 || B.size() == 0) continue;
        // k! C(n+k,k) C(m+k,k)
        double coef = 1.0;
        for (int i = 1; i <= k; ++i) coef *= i;
        for (int i = 1; i <= k; ++i) coef = coef * (n + i) / i;
        for (int i = 1; i <= k; ++i) coef = coef * (m + i) / i;
        // Contract the trailing k slots: reshape A as K^n x K^k and B as
        // K^m x K^k, then R += coef * A B^T. The chaos-coefficient
        // extraction below only needs class sums, so no explicit
        // symmetrization is required.
        using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMat> Am(A.data(), kpow(n), kpow(k));
        Eigen::Map<const RowMat> Bm(B.data(), kpow(m), kpow(k));
        RowMat R = Am * Bm.transpose();
        Eigen::Map<const Eigen::VectorXd> Rv(R.data(), R.size());
        result += coef * Rv;
        any = true;
      }
    }
    if (!any) continue;
    // Sum dense entries over multiset classes; the class sum IS the chaos
    // coefficient c_gamma.
    if (j == 0) {
      deposit(out, dropped, MultiIndex{}, result[0]);
      continue;
    }
    std::map<MultiIndex, double> acc;
    std::vector<int> tuple(j, 0);
    std::vector<int> counts(K, 0);
    for (Eigen::Index idx = 0; idx < result.size(); ++idx) {
      if (result[idx] != 0.0) {
        Eigen::Index rem = idx;
        for (int s = j - 1; s >= 0; --s) {
          tuple[s] = static_cast<int>(rem % K);
          rem /= K;
        }
        MultiIndex gamma;
        std::fill(counts.begin(), counts.end(), 0);
        for (int v : tuple) counts[v]++;
        for (int i = 0; i < K; ++i)
          if (counts[i] > 0) gamma = gamma.plus(MultiIndex::unit(modes[i], counts[i]));
        acc[gamma] += result[idx];
      }
    }
    for (const auto& [gamma, v] : acc) deposit(out, dropped, gamma, v);
  }
  flush_dropped(dropped, out);
  return out;
}

ChaosVector product_seq(const ChaosVector& f, const ChaosVector& g, ProductKind kind,
                        int m) {
  if (m < 0) throw std::invalid_argument("product_seq: negative level");
  switch (kind) {
    case ProductKind::right:
      return mul(f, project_order(g, m));
    case ProductKind::left:
      return mul(project_order(f, m), g);
    case ProductKind::sym:
      return mul(project_order(f, m), project_order(g, m));
  }
  throw std::logic_error("product_seq: bad kind");
}

bool disjoint_mode_support(const ChaosVector& f, const ChaosVector& g) {
  std::set<int> fm;
  for (const auto& [mi, c] : f.coeffs())
    for (const auto& [m, p] : mi.terms()) fm.insert(m);
  for (const auto& [mi, c] : g.coeffs())
    for (const auto& [m, p] : mi.terms())
      if (fm.count(m)) return false;
  return true;
}

}  // namespace wnc
