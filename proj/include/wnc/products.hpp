#pragma once

#include <stdexcept>

#include "wnc/chaos.hpp"

namespace wnc {

/// Thrown when the contraction oracle is asked for an instance beyond its
/// documented envelope (combined order <= 6, active modes <= 8).
struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wick product: coefficient convolution (F <> G)_gamma =
/// sum_{alpha+beta=gamma} c_alpha d_beta. Orders beyond the cap go to
/// tail_mass.
ChaosVector wick(const ChaosVector& f, const ChaosVector& g);

/// Pointwise product of the two Gaussian polynomials, computed by the
/// per-mode Hermite linearization
///   h_a h_b = sum_k k! C(a,k) C(b,k) h_{a+b-2k}
/// applied coordinate-wise to H_alpha H_beta.
ChaosVector mul(const ChaosVector& f, const ChaosVector& g);

/// Slow reference path for mul: reconstitutes dense symmetric tensors from
/// the coefficients and applies the tensor-contraction product formula
///   H_j = sum_{j=m+n} sum_k k! C(n+k,k) C(m+k,k) F_{n+k} (x)_k G_{m+k}
/// directly. Small instances only.
ChaosVector mul_contraction_oracle(const ChaosVector& f, const ChaosVector& g);

enum class ProductKind { right, left, sym };

/// Level-m stage of the chaos-approximation products:
/// right = F (Pi_m G), left = (Pi_m F) G, sym = (Pi_m F)(Pi_m G).
ChaosVector product_seq(const ChaosVector& f, const ChaosVector& g, ProductKind kind,
                        int m);

/// Discrete strong-independence surrogate: the Hermite modes appearing in
/// f and in g are disjoint sets.
bool disjoint_mode_support(const ChaosVector& f, const ChaosVector& g);

}  // namespace wnc
