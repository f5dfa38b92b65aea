#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wnc {

/// Finitely supported sequence of nonnegative integers indexing the
/// Wick-Hermite basis elements H_alpha. Stored sparsely as sorted
/// (mode, power) pairs with power > 0.
class MultiIndex {
 public:
  MultiIndex() = default;

  /// power * e_mode.
  static MultiIndex unit(int mode, int power = 1);
  /// From a dense list of powers, zeros dropped.
  static MultiIndex from_dense(std::span<const int> powers);

  int power(int mode) const;
  int order() const;            // |alpha| = sum of powers
  double factorial() const;     // alpha! (exact while it fits in a double)
  double log_factorial() const;
  int max_mode() const;         // -1 for the empty index
  bool empty() const { return terms_.empty(); }

  const std::vector<std::pair<int, int>>& terms() const { return terms_; }

  MultiIndex plus(const MultiIndex& other) const;

  /// Dense-lexicographic order on the power sequences; gives the
  /// deterministic iteration order used by every coefficient table.
  bool operator<(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const { return terms_ == other.terms_; }

  /// Sparse "mode^power" notation separated by spaces; empty string for H_0.
  std::string to_string() const;

 private:
  std::vector<std::pair<int, int>> terms_;
};

}  // namespace wnc
