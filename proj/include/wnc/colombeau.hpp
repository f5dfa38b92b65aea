#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "wnc/chaos.hpp"

namespace wnc {

/// m-indexed family of chaos vectors, a representative of a stochastic
/// generalized function.
struct GenSequence {
  std::vector<ChaosVector> terms;  // indexed m = 0..M
  std::string meta;                // provenance label

  int levels() const { return static_cast<int>(terms.size()); }
};

/// m-indexed family of reals, a representative of a generalized number.
struct GenNumber {
  Eigen::VectorXd values;
};

enum class Verdict { negligible, moderate, unknown };

std::string to_string(Verdict v);

/// Fitted growth of a norm sequence: log ||phi_m||_p ~ rate * m + log C
/// over the upper half of the levels, with the classification verdict.
struct GrowthReport {
  std::string label;
  int p = 0;
  double rate = 0.0;      // fitted exponential rate a
  double constant = 0.0;  // C with ||phi_m||_p <= C e^{rate m} for all m
  double residual = 0.0;  // RMS of the fit on the upper half
  Verdict verdict = Verdict::unknown;
};

/// CSV row "label,p,rate,C,residual,verdict".
std::string growth_csv_row(const GrowthReport& r);

struct ClassifyOptions {
  std::vector<double> probes = {1.0, 2.0, 4.0, 8.0};  // negligibility grid
  double decay_tol = 1e-8;   // e^{aM} ||phi_M||_p must not exceed this
  double rate_ceiling = 16;  // growth beyond every probe -> unknown
  double zero_floor = 1e-300;
};

/// terms[m] = Pi_m F for m = 0..M.
GenSequence embed(const ChaosVector& f, int m_levels);

/// Growth classification per norm index p. Fits on the upper half of the
/// levels; needs levels() >= 8 for a stable fit.
std::vector<GrowthReport> classify(const GenSequence& s, const std::vector<int>& p_grid,
                                   const ClassifyOptions& opts = {});

GrowthReport classify_scalar(const std::string& label, const Eigen::VectorXd& values,
                             const ClassifyOptions& opts = {});

/// values[m] = E(terms[m]).
GenNumber gen_expectation(const GenSequence& s);

GrowthReport gen_number_classify(const GenNumber& x, const ClassifyOptions& opts = {});

struct AssociationReport {
  double limit = 0.0;             // final pairing value
  bool associated = false;        // max |pairing| over the final quarter <= tol
  std::vector<double> pairings;   // p_m = <<s_m - t_m, test>>
};

/// Tests lim <<s_m - t_m, test>> = 0 on the available levels.
AssociationReport associated_limit(const GenSequence& s, const GenSequence& t,
                                   const ChaosVector& test, double tol);

}  // namespace wnc
