#include "wnc/colombeau.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace wnc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LineFit f;
  double denom = n * sxx - sx * sx;
  f.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

// Core classifier over log values y_m = log ||phi_m|| (-inf allowed).
GrowthReport classify_core(const std::string& label, int p, const std::vector<double>& ys,
                           const ClassifyOptions& opts) {
  GrowthReport r;
  r.label = label;
  r.p = p;
  const int M = static_cast<int>(ys.size()) - 1;
  if (M < 7) throw std::invalid_argument("classify: need at least 8 levels for a stable fit");

  double probe_max = *std::max_element(opts.probes.begin(), opts.probes.end());
  double log_tol = std::log(opts.decay_tol);

  bool all_zero = std::all_of(ys.begin(), ys.end(), [](double y) { return y == kNegInf; });
  if (all_zero) {
    // Degenerate fit: negligible by convention.
    r.rate = -probe_max;
    r.constant = 0.0;
    r.residual = 0.0;
    r.verdict = Verdict::negligible;
    return r;
  }

  // Replace exact zeros by a floor well below everything finite, so the
  // fits stay defined.
  double min_finite = 0.0;
  for (double y : ys)
    if (y != kNegInf) min_finite = std::min(min_finite, y);
  std::vector<double> yf(ys);
  for (double& y : yf)
    if (y == kNegInf) y = min_finite - 50.0;

  auto window_fit = [&](int lo, int hi) {
    std::vector<double> xs, ws;
    for (int m = lo; m <= hi; ++m) {
      xs.push_back(m);
      ws.push_back(yf[m]);
    }
    return fit_line(xs, ws);
  };

  LineFit upper = window_fit(M / 2, M);
  int q_lo = M - std::max(2, M / 4);
  LineFit late = window_fit(q_lo, M);

  r.rate = upper.slope;
  r.residual = upper.rms;
  // C such that ||phi_m|| <= C e^{rate m} for every m, by construction.
  double log_c = kNegInf;
  for (int m = 0; m <= M; ++m) log_c = std::max(log_c, yf[m] - r.rate * m);
  r.constant = std::exp(log_c);

  // Negligible: every probe passes the decayed test at m = M, the decayed
  // sequence is falling over the final quarter, and the fitted slope beats
  // the largest probe.
  bool negligible = upper.slope <= -probe_max;
  for (double a : opts.probes) {
    if (!negligible) break;
    if (ys[M] != kNegInf && ys[M] + a * M > log_tol) negligible = false;
    for (int m = q_lo; m + 1 <= M && negligible; ++m) {
      double inc = (yf[m + 1] + a * (m + 1)) - (yf[m] + a * m);
      if (inc > 0.5) negligible = false;
    }
  }
  if (negligible) {
    r.verdict = Verdict::negligible;
    return r;
  }

  // Moderate: the upper-half fit is an honest exponential bound. A
  // super-exponential sequence shows an accelerating slope (drift between
  // the final-quarter fit and the upper-half fit) or blows past every
  // probe's ceiling.
  double drift_tol = 0.25 + 0.05 * std::abs(upper.slope);
  bool drift_ok = (late.slope - upper.slope) <= drift_tol;
  bool ceiling_ok = upper.slope <= opts.rate_ceiling && late.slope <= opts.rate_ceiling;
  r.verdict = (drift_ok && ceiling_ok) ? Verdict::moderate : Verdict::unknown;
  return r;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::negligible: return "negligible";
    case Verdict::moderate: return "moderate";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

std::string growth_csv_row(const GrowthReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%.6g,%.6g,%s", r.label.c_str(), r.p, r.rate,
                r.constant, r.residual, to_string(r.verdict).c_str());
  return buf;
}

GenSequence embed(const ChaosVector& f, int m_levels) {
  if (m_levels < 4) throw std::invalid_argument("embed: need M >= 4 levels");
  GenSequence s;
  s.meta = "iota";
  s.terms.reserve(m_levels + 1);
  for (int m = 0; m <= m_levels; ++m) s.terms.push_back(project_order(f, m));
  return s;
}

std::vector<GrowthReport> classify(const GenSequence& s, const std::vector<int>& p_grid,
                                   const ClassifyOptions& opts) {
  std::vector<GrowthReport> out;
  for (int p : p_grid) {
    std::vector<double> ys;
    ys.reserve(s.terms.size());
    for (const auto& t : s.terms) ys.push_back(norm_report(t, p).log_value);
    out.push_back(classify_core(s.meta, p, ys, opts));
  }
  return out;
}

GrowthReport classify_scalar(const std::string& label, const Eigen::VectorXd& values,
                             const ClassifyOptions& opts) {
  std::vector<double> ys(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double a = std::abs(values[i]);
    ys[i] = a <= opts.zero_floor ? kNegInf : std::log(a);
  }
  return classify_core(label, 0, ys, opts);
}

GenNumber gen_expectation(const GenSequence& s) {
  GenNumber x;
  x.values.resize(s.terms.size());
  for (std::size_t m = 0; m < s.terms.size(); ++m) x.values[m] = expectation(s.terms[m]);
  return x;
}

GrowthReport gen_number_classify(const GenNumber& x, const ClassifyOptions& opts) {
  return classify_scalar("gen-number", x.values, opts);
}

AssociationReport associated_limit(const GenSequence& s, const GenSequence& t,
                                   const ChaosVector& test, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("associated_limit: tol must be positive");
  const int levels = std::min(s.levels(), t.levels());
  if (levels == 0) throw std::invalid_argument("associated_limit: empty sequences");
  AssociationReport r;
  r.pairings.reserve(levels);
  for (int m = 0; m < levels; ++m)
    r.pairings.push_back(pairing(s.terms[m] - t.terms[m], test));
  r.limit = r.pairings.back();
  int q_lo = levels - 1 - std::max(1, (levels - 1) / 4);
  double worst = 0.0;
  for (int m = q_lo; m < levels; ++m) worst = std::max(worst, std::abs(r.pairings[m]));
  r.associated = worst <= tol;
  return r;
}

}  // namespace wnc
