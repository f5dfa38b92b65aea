#include "wnc/multi_index.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wnc {

MultiIndex MultiIndex::unit(int mode, int power) {
  if (mode < 0 || power < 0) throw std::invalid_argument("MultiIndex::unit: negative mode or power");
  MultiIndex mi;
  if (power > 0) mi.terms_.emplace_back(mode, power);
  return mi;
}

MultiIndex MultiIndex::from_dense(std::span<const int> powers) {
  MultiIndex mi;
  for (std::size_t j = 0; j < powers.size(); ++j) {
    if (powers[j] < 0) throw std::invalid_argument("MultiIndex::from_dense: negative power");
    if (powers[j] > 0) mi.terms_.emplace_back(static_cast<int>(j), powers[j]);
  }
  return mi;
}

int MultiIndex::power(int mode) const {
  for (const auto& [m, p] : terms_)
    if (m == mode) return p;
  return 0;
}

int MultiIndex::order() const {
  int n = 0;
  for (const auto& [m, p] : terms_) n += p;
  return n;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (const auto& [m, p] : terms_)
    for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

double MultiIndex::log_factorial() const {
  double lf = 0.0;
  for (const auto& [m, p] : terms_) lf += std::lgamma(static_cast<double>(p) + 1.0);
  return lf;
}

int MultiIndex::max_mode() const {
  return terms_.empty() ? -1 : terms_.back().first;
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
  MultiIndex out;
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      out.terms_.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      out.terms_.push_back(*b++);
    } else {
      out.terms_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  return out;
}

bool MultiIndex::operator<(const MultiIndex& other) const {
  // Walk the merged supports in mode order; first differing power decides.
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    int ma = (a != terms_.end()) ? a->first : INT32_MAX;
    int mb = (b != other.terms_.end()) ? b->first : INT32_MAX;
    int mode = ma < mb ? ma : mb;
    int pa = (ma == mode) ? a->second : 0;
    int pb = (mb == mode) ? b->second : 0;
    if (pa != pb) return pa < pb;
    if (ma == mode) ++a;
    if (mb == mode) ++b;
  }
  return false;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, p] : terms_) {
    if (!first) os << ' ';
    os << m << '^' << p;
    first = false;
  }
  return os.str();
}

}  // namespace wnc
