#include "wnc/chaos.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "wnc/hermite.hpp"

namespace wnc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogMax = 709.0;  // log of the largest finite double, rounded down
}  // namespace

double ChaosVector::coeff(const MultiIndex& mi) const {
  auto it = coeffs_.find(mi);
  return it == coeffs_.end() ? 0.0 : it->second;
}

bool ChaosVector::fits(const MultiIndex& mi) const {
  return mi.order() <= layout_.order_cap && mi.max_mode() < layout_.mode_cap;
}

void ChaosVector::set_coeff(const MultiIndex& mi, double value) {
  if (!fits(mi)) throw std::invalid_argument("ChaosVector::set_coeff: index outside caps");
  if (value == 0.0)
    coeffs_.erase(mi);
  else
    coeffs_[mi] = value;
}

bool ChaosVector::accumulate(const MultiIndex& mi, double value) {
  if (value == 0.0) return true;
  if (!fits(mi)) return false;
  auto [it, inserted] = coeffs_.try_emplace(mi, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) coeffs_.erase(it);
  }
  return true;
}

void ChaosVector::add_tail_mass(double m) {
  if (m < 0.0) throw std::invalid_argument("ChaosVector::add_tail_mass: negative mass");
  tail_mass_ += m;
}

int ChaosVector::max_order() const {
  int n = 0;
  for (const auto& [mi, c] : coeffs_) n = std::max(n, mi.order());
  return n;
}

double dropped_mass_weight(const MultiIndex& mi, double value) {
  double lt = mi.log_factorial() + 2.0 * kTailNormIndex * mi.order() +
              2.0 * std::log(std::abs(value));
  return lt > kLogMax ? std::numeric_limits<double>::infinity() : std::exp(lt);
}

NormReport norm_report(const ChaosVector& f, int p) {
  if (f.coeffs().empty()) return {0.0, kNegInf, false};
  // One pass computes both a plain-double sum (exact factorials while they
  // fit) and a log-sum-exp that survives overflow.
  double plain = 0.0;
  bool plain_ok = true;
  double max_lt = kNegInf;
  std::vector<double> lts;
  lts.reserve(f.coeffs().size());
  for (const auto& [mi, c] : f.coeffs()) {
    int n = mi.order();
    double lt = mi.log_factorial() + 2.0 * p * n + 2.0 * std::log(std::abs(c));
    lts.push_back(lt);
    max_lt = std::max(max_lt, lt);
    if (plain_ok) {
      double term = mi.factorial() * std::exp(2.0 * static_cast<double>(p) * n) * c * c;
      if (std::isfinite(term))
        plain += term;
      else
        plain_ok = false;
    }
  }
  double lse = 0.0;
  for (double lt : lts) lse += std::exp(lt - max_lt);
  double log_sq = max_lt + std::log(lse);

  NormReport r;
  r.log_value = 0.5 * log_sq;
  if (plain_ok && std::isfinite(plain)) {
    r.value = std::sqrt(plain);
  } else if (log_sq <= 2.0 * kLogMax) {
    r.value = std::exp(0.5 * log_sq);
  } else {
    r.value = std::numeric_limits<double>::infinity();
    r.saturated = true;
  }
  return r;
}

double norm(const ChaosVector& f, int p) { return norm_report(f, p).value; }

ChaosVector project_order(const ChaosVector& f, int m) {
  if (m < 0) throw std::invalid_argument("project_order: negative order");
  ChaosVector out(f.layout());
  for (const auto& [mi, c] : f.coeffs())
    if (mi.order() <= m) out.set_coeff(mi, c);
  out.add_tail_mass(f.tail_mass());
  return out;
}

ChaosVector project_modes(const ChaosVector& f, int j_modes) {
  if (j_modes < 0) throw std::invalid_argument("project_modes: negative mode count");
  ChaosVector out(f.layout());
  for (const auto& [mi, c] : f.coeffs())
    if (mi.max_mode() < j_modes) out.set_coeff(mi, c);
  out.add_tail_mass(f.tail_mass());
  return out;
}

double pairing(const ChaosVector& f, const ChaosVector& g) {
  if (!compatible(f.layout(), g.layout()))
    throw std::invalid_argument("pairing: dimension mismatch");
  // Iterate the smaller table.
  const ChaosVector& a = f.size() <= g.size() ? f : g;
  const ChaosVector& b = f.size() <= g.size() ? g : f;
  double s = 0.0;
  for (const auto& [mi, c] : a.coeffs()) {
    double d = b.coeff(mi);
    if (d == 0.0) continue;
    double term = mi.factorial() * c * d;
    if (!std::isfinite(term)) {
      double lt = mi.log_factorial() + std::log(std::abs(c)) + std::log(std::abs(d));
      term = ((c * d) < 0 ? -1.0 : 1.0) * std::exp(lt);
    }
    s += term;
  }
  return s;
}

double s_transform(const ChaosVector& f, const Eigen::VectorXd& phi_hat) {
  if (phi_hat.size() > f.layout().mode_cap)
    throw std::invalid_argument("s_transform: phi_hat longer than mode cap");
  double s = 0.0;
  for (const auto& [mi, c] : f.coeffs()) {
    double m = c;
    for (const auto& [mode, pw] : mi.terms()) {
      double base = mode < phi_hat.size() ? phi_hat[mode] : 0.0;
      for (int k = 0; k < pw; ++k) m *= base;
      if (m == 0.0) break;
    }
    s += m;
  }
  return s;
}

double expectation(const ChaosVector& f) { return f.coeff(MultiIndex{}); }

ChaosVector from_first_order(BasisLayout layout, const Eigen::VectorXd& g) {
  if (g.size() > layout.mode_cap)
    throw std::invalid_argument("from_first_order: vector longer than mode cap");
  ChaosVector out(layout);
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (g[j] != 0.0) out.set_coeff(MultiIndex::unit(static_cast<int>(j)), g[j]);
  return out;
}

namespace {

void power_series_rec(const std::vector<int>& modes, const Eigen::VectorXd& g,
                      std::size_t pos, int budget, MultiIndex prefix, double g_pow,
                      double fact, const std::vector<double>& scale, ChaosVector& out) {
  if (pos == modes.size()) {
    int n = prefix.order();
    out.accumulate(prefix, scale[n] * g_pow / fact);
    return;
  }
  int j = modes[pos];
  double p = 1.0;
  double f = 1.0;
  for (int k = 0; k <= budget; ++k) {
    MultiIndex next = prefix.plus(MultiIndex::unit(j, k));
    power_series_rec(modes, g, pos + 1, budget - k, std::move(next), g_pow * p, fact * f,
                     scale, out);
    p *= g[j];
    f *= k + 1;
  }
}

}  // namespace

ChaosVector power_series(BasisLayout layout, const Eigen::VectorXd& g,
                         const std::function<double(int)>& scale) {
  if (g.size() > layout.mode_cap)
    throw std::invalid_argument("power_series: vector longer than mode cap");
  const int cap = layout.order_cap;
  std::vector<int> modes;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (g[j] != 0.0) modes.push_back(static_cast<int>(j));

  std::vector<double> scale_tab(cap + 1);
  for (int n = 0; n <= cap; ++n) scale_tab[n] = scale(n);

  ChaosVector out(layout);
  power_series_rec(modes, g, 0, cap, MultiIndex{}, 1.0, 1.0, scale_tab, out);

  // Dropped orders: tail of sum_n e^{2 p_tail n} scale(n)^2 |g|^{2n} / n!.
  double g2 = g.squaredNorm();
  if (g2 > 0.0) {
    double log_g2 = std::log(g2);
    double tail = 0.0;
    for (int n = cap + 1; n <= cap + 512; ++n) {
      double sn = scale(n);
      if (sn == 0.0) continue;
      double lt = 2.0 * kTailNormIndex * n + 2.0 * std::log(std::abs(sn)) + n * log_g2 -
                  std::lgamma(n + 1.0);
      double term = std::exp(lt);
      tail += term;
      if (term < 1e-300 || (tail > 0.0 && term < 1e-18 * tail)) break;
    }
    out.add_tail_mass(tail);
  }
  return out;
}

ChaosVector wick_exp(BasisLayout layout, const Eigen::VectorXd& g) {
  return power_series(layout, g, [](int) { return 1.0; });
}

double evaluate(const ChaosVector& f, const Eigen::VectorXd& xi) {
  double s = 0.0;
  for (const auto& [mi, c] : f.coeffs()) {
    if (mi.max_mode() >= xi.size())
      throw std::invalid_argument("evaluate: sample vector shorter than support");
    double v = c;
    for (const auto& [mode, pw] : mi.terms()) v *= hermite_poly(pw, xi[mode]);
    s += v;
  }
  return s;
}

ChaosVector operator+(const ChaosVector& a, const ChaosVector& b) {
  ChaosVector out(merged(a.layout(), b.layout()));
  for (const auto& [mi, c] : a.coeffs()) out.accumulate(mi, c);
  for (const auto& [mi, c] : b.coeffs()) out.accumulate(mi, c);
  double ta = a.tail_mass(), tb = b.tail_mass();
  out.add_tail_mass(ta + tb + 2.0 * std::sqrt(ta * tb));
  return out;
}

ChaosVector operator-(const ChaosVector& a, const ChaosVector& b) { return a + (-1.0) * b; }

ChaosVector operator*(double s, const ChaosVector& a) {
  ChaosVector out(a.layout());
  if (s != 0.0)
    for (const auto& [mi, c] : a.coeffs()) out.set_coeff(mi, s * c);
  out.add_tail_mass(s * s * a.tail_mass());
  return out;
}

std::string to_text(const ChaosVector& f) {
  std::ostringstream os;
  os << f.layout().dim << ' ' << f.layout().mode_cap << ' ' << f.layout().order_cap << '\n';
  char buf[40];
  for (const auto& [mi, c] : f.coeffs()) {
    std::snprintf(buf, sizeof buf, "%.17g", c);
    os << mi.to_string() << " : " << buf << '\n';
  }
  return os.str();
}

ChaosVector chaos_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("chaos_from_text: empty input");
  BasisLayout layout;
  if (std::sscanf(line.c_str(), "%d %d %d", &layout.dim, &layout.mode_cap,
                  &layout.order_cap) != 3)
    throw std::invalid_argument("chaos_from_text: bad header");
  ChaosVector out(layout);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("chaos_from_text: row without ':'");
    MultiIndex mi;
    std::istringstream left(line.substr(0, colon));
    std::string tok;
    while (left >> tok) {
      auto caret = tok.find('^');
      if (caret == std::string::npos)
        throw std::invalid_argument("chaos_from_text: bad index token '" + tok + "'");
      int mode = std::stoi(tok.substr(0, caret));
      int pw = std::stoi(tok.substr(caret + 1));
      mi = mi.plus(MultiIndex::unit(mode, pw));
    }
    double c = std::strtod(line.c_str() + colon + 1, nullptr);
    out.set_coeff(mi, c);
  }
  return out;
}

}  // namespace wnc
