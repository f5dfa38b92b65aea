#include "wnc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wnc/chaos.hpp"
#include "wnc/colombeau.hpp"
#include "wnc/expr.hpp"
#include "wnc/feynman_kac.hpp"
#include "wnc/hermite.hpp"
#include "wnc/noise.hpp"
#include "wnc/products.hpp"
#include "wnc/quadrature.hpp"
#include "wnc/sde.hpp"

namespace wnc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Stages artifact contents and commits them atomically at the end of the
// run, so an aborted run leaves no partial outputs behind.
class Stager {
 public:
  explicit Stager(const std::string& out_dir) : dir_(out_dir) {}

  void stage(const std::string& name, std::string content) {
    staged_.push_back({name, std::move(content)});
  }

  std::vector<std::string> commit() {
    fs::create_directories(dir_);
    std::vector<std::string> paths;
    for (const auto& [name, content] : staged_) {
      fs::path final_path = fs::path(dir_) / name;
      fs::path tmp = final_path;
      tmp += ".tmp";
      {
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        if (!os) throw std::runtime_error("failed to write " + tmp.string());
      }
      fs::rename(tmp, final_path);
      paths.push_back(final_path.string());
    }
    return paths;
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> staged_;
};

// ---------------------------------------------------------------------
// SHA-1 (for run-manifest content hashes).

struct Sha1 {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

  static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

  void block(const unsigned char* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (p[4 * i] << 24) | (p[4 * i + 1] << 16) | (p[4 * i + 2] << 8) | p[4 * i + 3];
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }
};

}  // namespace

std::string sha1_hex(const std::string& data) {
  Sha1 s;
  std::vector<unsigned char> buf(data.begin(), data.end());
  std::uint64_t bits = static_cast<std::uint64_t>(buf.size()) * 8;
  buf.push_back(0x80);
  while (buf.size() % 64 != 56) buf.push_back(0);
  for (int i = 7; i >= 0; --i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
  for (std::size_t off = 0; off < buf.size(); off += 64) s.block(buf.data() + off);
  char out[41];
  for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", s.h[i]);
  return std::string(out, 40);
}

Check check_le(const std::string& name, double value, double bound) {
  return {name, value, bound, "<=", value <= bound};
}

Check check_ge(const std::string& name, double value, double bound) {
  return {name, value, bound, ">=", value >= bound};
}

Check check_bool(const std::string& name, bool ok) {
  return {name, ok ? 1.0 : 0.0, 1.0, "bool", ok};
}

namespace {

// ---------------------------------------------------------------------
// Shared helpers.

ChaosVector random_sparse(std::mt19937_64& rng, const BasisLayout& layout, int entries,
                          int max_order, bool integer_coeffs) {
  std::uniform_int_distribution<int> mode_pick(0, layout.mode_cap - 1);
  std::uniform_int_distribution<int> extra(0, 2);
  std::uniform_int_distribution<int> int_coeff(1, 3);
  std::uniform_real_distribution<double> real_coeff(-1.0, 1.0);
  std::bernoulli_distribution flip(0.5);
  ChaosVector f(layout);
  for (int e = 0; e < entries; ++e) {
    int order = 1 + extra(rng) % max_order;
    if (flip(rng) && e == 0) order = 0;  // keep some mass at order zero
    MultiIndex mi;
    for (int k = 0; k < order; ++k) mi = mi.plus(MultiIndex::unit(mode_pick(rng)));
    if (mi.order() > layout.order_cap) continue;
    double c = integer_coeffs ? (flip(rng) ? 1.0 : -1.0) * int_coeff(rng) : real_coeff(rng);
    f.set_coeff(mi, f.coeff(mi) == 0.0 ? c : f.coeff(mi));
  }
  return f;
}

double heat_closed_form(double t, double x) {
  return std::exp(-x * x / (2.0 * (1.0 + t))) / std::sqrt(1.0 + t);
}

expr::NodePtr parse_field_expr(const std::string& text) { return expr::parse(text); }

CoefficientField expr_field(const std::string& label, const std::string& text) {
  auto ast = parse_field_expr(text);
  return {label + ":" + text, [ast](const Eigen::VectorXd& x) {
            expr::EvalContext ctx;
            ctx.env["x"] = x[0];
            auto r = expr::eval(ast, ctx);
            if (!std::holds_alternative<double>(r.value))
              throw std::runtime_error("coefficient expression must evaluate to a number");
            return std::get<double>(r.value);
          }};
}

SdeSpec spec_from_config(const RunConfig& c) {
  SdeSpec s;
  if (c.preset == "heat-gaussian")
    s = heat_gaussian_spec();
  else if (c.preset == "heat-gaussian-2d")
    s = heat_gaussian_2d_spec();
  else if (c.preset == "ou")
    s = ou_spec();
  else if (c.preset == "pathwise-exp")
    s = pathwise_exp_spec();
  else if (c.preset == "constant-drift")
    s = constant_drift_spec(0.5);
  else
    throw std::invalid_argument("unknown preset '" + c.preset + "'");
  if (!c.drift_expr.empty()) s.drift[0] = expr_field("drift", c.drift_expr);
  if (!c.sigma_expr.empty()) s.sigma[0][0] = expr_field("sigma", c.sigma_expr);
  if (!c.initial_expr.empty()) s.initial = expr_field("initial", c.initial_expr);
  return s;
}

json config_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["caps"] = {{"dim", c.dim}, {"mode_cap", c.mode_cap}, {"order_cap", c.order_cap}};
  j["hermite"] = {{"jmax", c.jmax},
                  {"quad_order", c.quad_order},
                  {"cd_nmax", c.cd_nmax},
                  {"eigen_jmax", c.eigen_jmax},
                  {"decay_jmax", c.decay_jmax}};
  j["algebra"] = {{"n_triples", c.n_triples}, {"n_pairs", c.n_pairs}, {"n_phi", c.n_phi}};
  j["quotient"] = {{"levels", c.levels},
                   {"embed_f_scale", c.embed_f_scale},
                   {"p_grid", c.p_grid},
                   {"probes", c.probes},
                   {"x_point", c.x_point}};
  j["donsker"] = {{"mc_samples", c.mc_samples},
                  {"mollify_eps", c.mollify_eps},
                  {"brownian_modes", c.brownian_modes}};
  j["spde"] = {{"preset", c.preset},       {"drift_expr", c.drift_expr},
               {"sigma_expr", c.sigma_expr}, {"initial_expr", c.initial_expr},
               {"horizon", c.horizon},     {"x0", c.x0},
               {"m_lo", c.m_lo},           {"m_hi", c.m_hi},
               {"m_list", c.m_list},       {"fk_order_cap", c.fk_order_cap},
               {"n_paths", c.n_paths},     {"dt", c.dt},
               {"seed2", c.seed2}};
  j["expr"] = c.expr_text;
  j["inject_failure"] = c.inject_failure;
  return j;
}

// ---------------------------------------------------------------------
// hermite-suite

void run_hermite_suite(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  std::ostringstream csv;
  csv << "check,detail,value\n";

  // Orthonormality against the Gauss-Hermite rule. Work with the bounded
  // Hermite functions and the gaussian-free weights w_i e^{x_i^2/2}: both
  // factors stay tame at the extreme nodes.
  Quadrature q = gauss_hermite_prob(c.quad_order);
  const int J = c.jmax;
  Eigen::MatrixXd tab(J + 1, q.nodes.size());
  Eigen::VectorXd wmod(q.nodes.size());
  std::vector<double> col(c.quad_order);
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) {
    hermite_fn_series(c.quad_order - 1, q.nodes[i], col);
    double kchristoffel = 0.0;
    for (int j = 0; j < c.quad_order; ++j) kchristoffel += col[j] * col[j];
    wmod[i] = 1.0 / kchristoffel;
    for (int j = 0; j <= J; ++j) tab(j, i) = col[j];
  }
  double orth_max = 0.0;
  for (int j = 0; j <= J; ++j)
    for (int k = j; k <= J; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < q.nodes.size(); ++i)
        s += wmod[i] * tab(j, i) * tab(k, i);
      orth_max = std::max(orth_max, std::abs(s - (j == k ? 1.0 : 0.0)));
    }
  csv << "orthonormality,max|int - delta| j k<=" << J << "," << fmt(orth_max) << "\n";
  checks.push_back(check_le("hermite.orthonormality", orth_max, 1e-8));

  // Christoffel-Darboux two-route agreement.
  double cd_max = 0.0;
  for (int n = 0; n <= c.cd_nmax; ++n) {
    for (double x = -3.0; x <= 3.01; x += 1.5) {
      for (double off : {0.1, 0.35, 1.0, 2.5, 5.0}) {
        double t = x - off;
        std::vector<double> ex(n + 2), et(n + 2);
        hermite_fn_series(n + 1, x, ex);
        hermite_fn_series(n + 1, t, et);
        double direct = 0.0;
        for (int j = 0; j <= n; ++j) direct += ex[j] * et[j];
        double closed =
            std::sqrt(n + 1.0) * (ex[n + 1] * et[n] - et[n + 1] * ex[n]) / (x - t);
        cd_max = std::max(cd_max, std::abs(direct - closed));
      }
    }
  }
  csv << "christoffel-darboux,two-route max diff n<=" << c.cd_nmax << "," << fmt(cd_max)
      << "\n";
  checks.push_back(check_le("hermite.christoffel_darboux", cd_max, 1e-10));

  // Eigen-relation by central differences:
  // (-d2/dx2 + x^2/4 + 1/2) eta_j = (j+1) eta_j.
  double eig_max = 0.0;
  const double h = 1e-3;
  for (int j = 0; j <= c.eigen_jmax; ++j) {
    double worst = 0.0, scale = 0.0;
    for (double x = -6.0; x <= 6.01; x += 0.25) {
      double em = hermite_fn(j, x - h), e0 = hermite_fn(j, x), ep = hermite_fn(j, x + h);
      double lhs = -(ep - 2.0 * e0 + em) / (h * h) + (0.25 * x * x + 0.5) * e0;
      double rhs = (j + 1.0) * e0;
      worst = std::max(worst, std::abs(lhs - rhs));
      scale = std::max(scale, std::abs(rhs));
    }
    eig_max = std::max(eig_max, worst / scale);
  }
  csv << "eigen-relation,max rel FD residual j<=" << c.eigen_jmax << "," << fmt(eig_max)
      << "\n";
  checks.push_back(check_le("hermite.eigen_relation", eig_max, 1e-5));

  // Uniform decay on the fixed dense grid [-8, 8].
  double decay_max = 0.0, decay_max_lower = 0.0;
  {
    std::vector<double> series(c.decay_jmax + 1);
    std::vector<double> sup(c.decay_jmax + 1, 0.0);
    for (double x = -8.0; x <= 8.0; x += 0.005) {
      hermite_fn_series(c.decay_jmax, x, series);
      for (int j = 1; j <= c.decay_jmax; ++j) sup[j] = std::max(sup[j], std::abs(series[j]));
    }
    for (int j = 1; j <= c.decay_jmax; ++j) {
      double v = std::pow(j, 0.25) * sup[j];
      decay_max = std::max(decay_max, v);
      if (j <= c.decay_jmax / 2) decay_max_lower = std::max(decay_max_lower, v);
      if (j % 16 == 0) csv << "decay,j=" << j << "," << fmt(v) << "\n";
    }
  }
  csv << "decay,max j^(1/4) sup|eta_j| j<=" << c.decay_jmax << "," << fmt(decay_max) << "\n";
  checks.push_back(check_le("hermite.decay_constant", decay_max, 1.2));
  // Plateau: the constant is already attained on the lower half of degrees.
  checks.push_back(check_le("hermite.decay_plateau", decay_max, decay_max_lower + 1e-9));

  stage.stage("hermite_suite.csv", csv.str());
}

// ---------------------------------------------------------------------
// algebra-suite

void run_algebra_suite(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  std::mt19937_64 rng(c.seed);
  std::ostringstream csv;
  csv << "check,detail,value\n";

  // Wick unit / commutativity / associativity, exact on integer data.
  BasisLayout work{1, 8, 15};
  double unit_max = 0.0, comm_max = 0.0, assoc_max = 0.0, tails = 0.0;
  ChaosVector one(work);
  one.set_coeff(MultiIndex{}, 1.0);
  for (int i = 0; i < c.n_triples; ++i) {
    ChaosVector f = random_sparse(rng, {1, 8, 5}, 4, 5, true);
    ChaosVector g = random_sparse(rng, {1, 8, 5}, 4, 5, true);
    ChaosVector h = random_sparse(rng, {1, 8, 5}, 4, 5, true);
    // Recreate inside the working caps so triple products do not overflow.
    auto widen = [&](const ChaosVector& v) {
      ChaosVector w(work);
      for (const auto& [mi, cf] : v.coeffs()) w.set_coeff(mi, cf);
      return w;
    };
    ChaosVector F = widen(f), G = widen(g), H = widen(h);
    ChaosVector u = wick(F, one);
    for (const auto& [mi, cf] : u.coeffs()) unit_max = std::max(unit_max, std::abs(cf - F.coeff(mi)));
    ChaosVector ab = wick(F, G), ba = wick(G, F);
    if (!(ab == ba)) comm_max = std::max(comm_max, 1.0);
    ChaosVector l = wick(ab, H), r = wick(F, wick(G, H));
    for (const auto& [mi, cf] : l.coeffs()) assoc_max = std::max(assoc_max, std::abs(cf - r.coeff(mi)));
    for (const auto& [mi, cf] : r.coeffs()) assoc_max = std::max(assoc_max, std::abs(cf - l.coeff(mi)));
    tails = std::max({tails, l.tail_mass(), r.tail_mass()});
  }
  csv << "wick,unit max diff," << fmt(unit_max) << "\n";
  csv << "wick,commutativity max diff," << fmt(comm_max) << "\n";
  csv << "wick,associativity max diff," << fmt(assoc_max) << "\n";
  csv << "wick,max tail_mass," << fmt(tails) << "\n";
  checks.push_back(check_le("algebra.wick_unit", unit_max, 0.0));
  checks.push_back(check_le("algebra.wick_commutative", comm_max, 0.0));
  checks.push_back(check_le("algebra.wick_associative", assoc_max, 0.0));
  checks.push_back(check_le("algebra.wick_tail_mass", tails, 0.0));

  // Pointwise product vs the contraction oracle.
  double oracle_max = 0.0;
  for (int i = 0; i < c.n_pairs; ++i) {
    BasisLayout lay{1, 6, 6};
    ChaosVector f = random_sparse(rng, {1, 6, 3}, 3, 3, false);
    ChaosVector g = random_sparse(rng, {1, 6, 3}, 3, 3, false);
    ChaosVector F(lay), G(lay);
    for (const auto& [mi, cf] : f.coeffs()) F.set_coeff(mi, cf);
    for (const auto& [mi, cf] : g.coeffs()) G.set_coeff(mi, cf);
    ChaosVector fast = mul(F, G);
    ChaosVector slow = mul_contraction_oracle(F, G);
    ChaosVector diff = fast - slow;
    for (const auto& [mi, cf] : diff.coeffs()) oracle_max = std::max(oracle_max, std::abs(cf));
  }
  csv << "mul,vs contraction oracle max diff," << fmt(oracle_max) << "\n";
  checks.push_back(check_le("algebra.mul_vs_oracle", oracle_max, 1e-10));

  // Pointwise-evaluation oracle at Gaussian sample points.
  std::normal_distribution<double> gauss(0.0, 1.0);
  double eval_max = 0.0;
  for (int i = 0; i < c.n_pairs; ++i) {
    BasisLayout lay{1, 6, 6};
    ChaosVector F(lay), G(lay);
    {
      ChaosVector f = random_sparse(rng, {1, 6, 3}, 3, 3, false);
      ChaosVector g = random_sparse(rng, {1, 6, 3}, 3, 3, false);
      for (const auto& [mi, cf] : f.coeffs()) F.set_coeff(mi, cf);
      for (const auto& [mi, cf] : g.coeffs()) G.set_coeff(mi, cf);
    }
    ChaosVector p = mul(F, G);
    Eigen::VectorXd xi(6);
    for (int k = 0; k < 6; ++k) xi[k] = gauss(rng);
    double lhs = evaluate(F, xi) * evaluate(G, xi);
    double rhs = evaluate(p, xi);
    eval_max = std::max(eval_max, std::abs(lhs - rhs));
  }
  csv << "mul,pointwise evaluation oracle max diff," << fmt(eval_max) << "\n";
  checks.push_back(check_le("algebra.mul_eval_oracle", eval_max, 1e-9));

  // S-transform multiplicativity of the Wick product.
  std::uniform_real_distribution<double> phi_dist(-0.7, 0.7);
  double s_max = 0.0;
  for (int i = 0; i < c.n_phi; ++i) {
    BasisLayout lay{1, 8, 10};
    ChaosVector F(lay), G(lay);
    {
      ChaosVector f = random_sparse(rng, {1, 8, 5}, 4, 5, false);
      ChaosVector g = random_sparse(rng, {1, 8, 5}, 4, 5, false);
      for (const auto& [mi, cf] : f.coeffs()) F.set_coeff(mi, cf);
      for (const auto& [mi, cf] : g.coeffs()) G.set_coeff(mi, cf);
    }
    ChaosVector w = wick(F, G);
    Eigen::VectorXd phi(8);
    for (int k = 0; k < 8; ++k) phi[k] = phi_dist(rng);
    double lhs = s_transform(w, phi);
    double rhs = s_transform(F, phi) * s_transform(G, phi);
    s_max = std::max(s_max, std::abs(lhs - rhs));
  }
  csv << "wick,S-transform multiplicativity max diff," << fmt(s_max) << "\n";
  checks.push_back(check_le("algebra.s_multiplicative", s_max, 1e-10));

  // W_m(x)^2 decomposition, exact coefficients.
  double w2_max = 0.0;
  for (int m : {0, 1, 2, 4, 8, 16}) {
    for (double x : {-2.0, -0.5, 0.0, 0.7, 1.3}) {
      BasisLayout lay{1, m + 1, 4};
      Eigen::VectorXd pt(1);
      pt << x;
      auto d = white_noise_squared(lay, pt, m);
      w2_max = std::max(w2_max, d.residual);
    }
  }
  csv << "white-noise,W^2 decomposition max residual," << fmt(w2_max) << "\n";
  checks.push_back(check_le("algebra.w2_decomposition", w2_max, 0.0));

  // Wick-exponential norm identity and exponential pairing.
  {
    BasisLayout lay{1, 8, 40};
    Eigen::VectorXd f(3), g(3);
    f << 0.48, 0.64, 0.6;   // |f| = 1
    g << 0.3, -0.4, 0.5;    // |g| = sqrt(0.5)
    f *= 0.999;             // keep |f| <= 1 strictly
    ChaosVector wf = wick_exp(lay, f);
    ChaosVector wg = wick_exp(lay, g);
    double worst_norm = 0.0;
    for (int p : {0, 1}) {
      double got = norm(wf, p);
      double want = std::exp(0.5 * std::exp(2.0 * p) * f.squaredNorm());
      worst_norm = std::max(worst_norm, std::abs(got - want) / want);
    }
    double pr = pairing(wf, wg);
    double want = std::exp(f.dot(g));
    double pair_rel = std::abs(pr - want) / want;
    csv << "wexp,norm identity rel error," << fmt(worst_norm) << "\n";
    csv << "wexp,exponential pairing rel error," << fmt(pair_rel) << "\n";
    checks.push_back(check_le("norms.wexp_identity", worst_norm, 1e-6));
    checks.push_back(check_le("norms.exp_pairing", pair_rel, 1e-6));
  }

  stage.stage("algebra_suite.csv", csv.str());
}

// ---------------------------------------------------------------------
// embed-study

void run_embed_study(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  BasisLayout lay{1, 8, 40};
  Eigen::VectorXd dir(2);
  dir << 0.6, 0.8;
  Eigen::VectorXd f = c.embed_f_scale * dir;
  ChaosVector phi = wick_exp(lay, f);

  // Order-grouped norm contributions; tail_p(m)^2 = sum_{n>m} groups.
  const int M = c.levels;
  std::ostringstream csv;
  csv << "m,p,a,value\n";
  bool monotone = true;
  double worst_at_m = 0.0;
  for (int p : c.p_grid) {
    std::vector<double> group(lay.order_cap + 1, 0.0);
    for (const auto& [mi, cf] : phi.coeffs())
      group[mi.order()] += mi.factorial() * std::exp(2.0 * p * mi.order()) * cf * cf;
    std::vector<double> tail(M + 1, 0.0);
    for (int m = 0; m <= M; ++m) {
      double t2 = 0.0;
      for (int n = m + 1; n <= lay.order_cap; ++n) t2 += group[n];
      tail[m] = std::sqrt(t2);
    }
    for (double a : c.probes) {
      if (a > 4.0) continue;  // the acceptance window is a <= 4
      double prev = 0.0;
      for (int m = 0; m <= M; ++m) {
        double v = std::exp(a * m) * tail[m];
        csv << m << ',' << p << ',' << fmt6(a) << ',' << fmt(v) << "\n";
        if (m > 0 && v >= prev) monotone = false;
        prev = v;
        if (m == M) worst_at_m = std::max(worst_at_m, v);
      }
    }
  }
  // Plain Pi_m convergence for a fat exponential (no decay weight).
  {
    Eigen::VectorXd ffat = 0.5 * dir;
    ChaosVector fat = wick_exp(lay, ffat);
    for (int p : c.p_grid) {
      std::vector<double> group(lay.order_cap + 1, 0.0);
      for (const auto& [mi, cf] : fat.coeffs())
        group[mi.order()] += mi.factorial() * std::exp(2.0 * p * mi.order()) * cf * cf;
      for (int m = 0; m <= M; ++m) {
        double t2 = 0.0;
        for (int n = m + 1; n <= lay.order_cap; ++n) t2 += group[n];
        csv << m << ',' << p << ",0," << fmt(std::sqrt(t2)) << "\n";
      }
    }
  }
  stage.stage("embed_study.csv", csv.str());
  checks.push_back(check_bool("embed.decayed_tails_strictly_decreasing", monotone));
  checks.push_back(check_le("embed.decayed_tail_at_M", worst_at_m, 1e-8));
}

// ---------------------------------------------------------------------
// noise-growth

void run_noise_growth(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  const int M = c.levels;
  BasisLayout lay{c.dim, M + 1, 1};
  Eigen::VectorXd x(c.dim);
  x.setConstant(c.x_point);
  GenSequence w;
  w.meta = "white-noise(" + fmt6(c.x_point) + ")";
  for (int m = 0; m <= M; ++m) w.terms.push_back(white_noise(lay, x, m));

  ClassifyOptions opts;
  opts.probes = c.probes;
  auto reports = classify(w, c.p_grid, opts);

  std::ostringstream csv;
  csv << "label,p,rate,C,residual,verdict\n";
  double worst_rate = 0.0;
  bool all_moderate = true;
  for (const auto& r : reports) {
    csv << growth_csv_row(r) << "\n";
    worst_rate = std::max(worst_rate, r.rate);
    all_moderate = all_moderate && r.verdict == Verdict::moderate;
  }

  GenSequence zero;
  zero.meta = "zero";
  for (int m = 0; m <= M; ++m) zero.terms.push_back(ChaosVector(lay));
  auto zrep = classify(zero, {0}, opts);
  csv << growth_csv_row(zrep[0]) << "\n";

  stage.stage("noise_growth.csv", csv.str());
  checks.push_back(check_bool("noise.white_noise_moderate", all_moderate));
  checks.push_back(check_le("noise.white_noise_rate", worst_rate, 0.1));
  checks.push_back(check_bool("noise.zero_sequence_negligible",
                              zrep[0].verdict == Verdict::negligible));
}

// ---------------------------------------------------------------------
// donsker-check (also carries the Brownian-coefficient checks)

void run_donsker_check(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  std::ostringstream csv;
  csv << "check,detail,value\n";

  // Brownian coefficients: monotone partial sums and two quadrature routes.
  {
    const double t = 1.0, s = 0.5;
    const int J = c.brownian_modes;
    Eigen::VectorXd bt = brownian_coeffs(t, J);
    Eigen::VectorXd bs = brownian_coeffs(s, J);
    Eigen::VectorXd bt_oracle(J);
    for (int j = 0; j < J; ++j)
      bt_oracle[j] = panel_gauss_legendre([j](double u) { return hermite_fn(j, u); }, 0.0,
                                          t, 16, 16 + j / 2);
    bool monotone = true;
    double run = 0.0, prev = -1.0;
    for (int j = 0; j < J; ++j) {
      run += bt[j] * bt[j];
      if (run < prev) monotone = false;
      prev = run;
    }
    double tail_a = t - run;
    double tail_b = t - bt_oracle.squaredNorm();
    csv << "brownian,sum b_j^2 at J=" << J << "," << fmt(run) << "\n";
    csv << "brownian,two-route tail diff," << fmt(std::abs(tail_a - tail_b)) << "\n";
    checks.push_back(check_bool("brownian.partial_sums_monotone", monotone));
    checks.push_back(
        check_le("brownian.tail_two_routes", std::abs(tail_a - tail_b), 1e-6));

    // pairing(B(t), B(s)) -> min(s,t) on trend.
    double gap_small = 0.0, gap_full = 0.0;
    for (int JJ : {8, J}) {
      double p = 0.0;
      for (int j = 0; j < JJ; ++j) p += bt[j] * bs[j];
      double gap = std::abs(p - std::min(s, t));
      if (JJ == 8)
        gap_small = gap;
      else
        gap_full = gap;
      csv << "brownian,|pairing - min| at J=" << JJ << "," << fmt(gap) << "\n";
    }
    checks.push_back(check_le("brownian.pairing_trend", gap_full, 0.5 * gap_small));
  }

  // Donsker expectation vs the mollified-delta Monte-Carlo oracle.
  {
    const double eps = c.mollify_eps;
    struct Pt {
      double a, t;
    };
    for (Pt pt : {Pt{0.0, 1.0}, Pt{1.0, 1.0}, Pt{0.5, 0.25}}) {
      ChaosVector dd = donsker_delta(pt.a, pt.t, 4, 12);
      double ex = expectation(dd);
      PathRng rng(c.seed, 0x00d5ce5u);
      long long hits = 0;
      const long long n = c.mc_samples;
      for (long long i = 0; i < n; ++i) {
        double bt_sample = std::sqrt(pt.t) * rng.normal();
        if (std::abs(bt_sample - pt.a) < eps) ++hits;
      }
      double p_hit = static_cast<double>(hits) / n;
      double est = p_hit / (2.0 * eps);
      double se = std::sqrt(p_hit * (1.0 - p_hit) / n) / (2.0 * eps);
      double diff = std::abs(ex - est);
      csv << "donsker,(a=" << fmt6(pt.a) << " t=" << fmt6(pt.t) << ") |E - MC|,"
          << fmt(diff) << "\n";
      csv << "donsker,(a=" << fmt6(pt.a) << " t=" << fmt6(pt.t) << ") 3se,"
          << fmt(3.0 * se) << "\n";
      checks.push_back(check_le("donsker.mollified_oracle(a=" + fmt6(pt.a) +
                                    ",t=" + fmt6(pt.t) + ")",
                                diff, 3.0 * se));

      // pairing with B(t): finite-J identity a p_t(a) sum b^2 / t.
      ChaosVector b = brownian(BasisLayout{1, 12, 1}, pt.t, 12);
      double pr = pairing(dd, b);
      double sumb2 = 0.0;
      for (const auto& [mi, cf] : b.coeffs()) sumb2 += cf * cf;
      double want = gaussian_density(pt.a, pt.t) * (pt.a / pt.t) * sumb2;
      csv << "donsker,pairing identity residual," << fmt(std::abs(pr - want)) << "\n";
      checks.push_back(check_le("donsker.pairing_identity(a=" + fmt6(pt.a) +
                                    ",t=" + fmt6(pt.t) + ")",
                                std::abs(pr - want), 1e-10));
    }
  }

  stage.stage("donsker_check.csv", csv.str());
}

// ---------------------------------------------------------------------
// spde helpers

std::string fk_csv_header() { return "t,x,m,order,coeff,stderr\n"; }

void fk_csv_rows(std::ostringstream& os, const FkPoint& pt, int m) {
  for (const auto& [mi, cf] : pt.value.coeffs())
    os << fmt6(pt.t) << ',' << fmt6(pt.x[0]) << ',' << m << ',' << mi.order() << ','
       << fmt(cf) << ',' << fmt(pt.coeff_stderr(mi)) << "\n";
}

void run_spde_solve(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  SdeSpec spec = spec_from_config(c);
  Eigen::VectorXd x(1);
  x << c.x0;

  std::ostringstream csv;
  csv << fk_csv_header();
  for (int m = c.m_lo; m <= c.m_hi; ++m) {
    FkParams params;
    params.noise_degree = m;
    params.coeff_order_cap = c.fk_order_cap;
    params.n_paths = c.n_paths;
    params.dt = c.dt;
    params.seed = c.seed;
    params.threads = c.threads;
    FkPoint pt = fk_solve(spec, c.horizon, x, params);
    fk_csv_rows(csv, pt, m);
    stage.stage("solution_m" + std::to_string(m) + ".cv", to_text(pt.value));
    if (pt.degenerate)
      checks.push_back(check_bool("spde.ess_not_degenerate(m=" + std::to_string(m) + ")",
                                  false));
  }

  // Zero-noise closed-form check for the heat preset.
  if (c.preset == "heat-gaussian" && c.m_lo < 0) {
    for (double xx : {c.x0, 1.0}) {
      Eigen::VectorXd xv(1);
      xv << xx;
      FkParams params;
      params.noise_degree = -1;
      params.coeff_order_cap = 0;
      params.n_paths = c.n_paths;
      params.dt = c.dt;
      params.seed = c.seed;
      params.threads = c.threads;
      FkPoint pt = fk_solve(spec, c.horizon, xv, params);
      double got = expectation(pt.value);
      double want = heat_closed_form(c.horizon, xx);
      double se = pt.coeff_stderr(MultiIndex{});
      csv << fmt6(c.horizon) << ',' << fmt6(xx) << ",-1,0," << fmt(got) << ',' << fmt(se)
          << "\n";
      checks.push_back(check_le("spde.heat_closed_form(x=" + fmt6(xx) + ")",
                                std::abs(got - want), 3.0 * se));
    }
  }
  stage.stage("spde_solve.csv", csv.str());
}

void run_spde_residual(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  SdeSpec spec = spec_from_config(c);
  FkParams params;
  params.coeff_order_cap = 3;
  params.n_paths = c.n_paths;
  params.dt = c.dt;
  params.seed = c.seed;
  params.threads = c.threads;

  std::vector<double> times, xs;
  if (c.preset == "pathwise-exp") {
    params.noise_degree = c.m_lo >= 0 ? c.m_lo : 2;
    double t0 = c.horizon;
    for (int k = -2; k <= 2; ++k) times.push_back(t0 + 2.0 * k * c.dt);
    for (int k = -2; k <= 2; ++k) xs.push_back(c.x0 + 0.25 * k);
  } else {
    params.noise_degree = c.m_lo >= 0 ? c.m_lo : 4;
    for (int k = -2; k <= 2; ++k) times.push_back(c.horizon + 0.05 * k);
    for (int k = -2; k <= 2; ++k) xs.push_back(c.x0 + 0.25 * k);
  }

  ResidualReport rep = residual(spec, params, times, xs, 2);

  std::ostringstream csv;
  csv << "quantity,p0,p1\n";
  csv << "residual," << fmt(rep.residual_p0) << ',' << fmt(rep.residual_p1) << "\n";
  csv << "mc_se," << fmt(rep.se_p0) << ',' << fmt(rep.se_p1) << "\n";
  csv << "fd_estimate," << fmt(rep.fd_p0) << ',' << fmt(rep.fd_p1) << "\n";
  csv << "dt_estimate," << fmt(rep.dt_p0) << ',' << fmt(rep.dt_p1) << "\n";
  csv << "budget," << fmt(rep.budget_p0) << ',' << fmt(rep.budget_p1) << "\n";
  stage.stage("spde_residual.csv", csv.str());

  if (c.preset == "pathwise-exp") {
    checks.push_back(check_le("spde.pathwise_residual", rep.residual_p0, 2.0 * c.dt));
  } else {
    checks.push_back(check_bool("spde.residual_grid_ok", rep.grid_ok));
    checks.push_back(check_bool("spde.residual_within_budget", rep.within_budget));
  }
}

void run_spde_compare_wick(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  SdeSpec spec = spec_from_config(c);
  Eigen::VectorXd x(1);
  x << c.x0;

  std::ostringstream csv;
  csv << "m,wick0,wick0_se,gen0,gen0_se,ratio,ratio_se,s_gen,s_wick,outside_reading,"
         "max_g2_over_m_2d\n";

  struct Row {
    int m;
    double w0, w0se, g0, g0se, ratio, ratio_se, gstat;
  };
  std::vector<Row> rows;
  SdeSpec spec2d = heat_gaussian_2d_spec();
  Eigen::VectorXd x2(2);
  x2 << c.x0, c.x0;
  for (int m : c.m_list) {
    FkParams params;
    params.noise_degree = m;
    params.coeff_order_cap = 1;
    params.n_paths = c.n_paths;
    params.dt = c.dt;
    params.seed = c.seed + static_cast<std::uint64_t>(m);
    params.threads = c.threads;
    FkPoint u = fk_solve(spec, c.horizon, x, params);
    FkPoint v = fk_solve_wick(spec, c.horizon, x, params);
    int K = static_cast<int>(modes_up_to_degree(2, m));
    Eigen::VectorXd h = Eigen::VectorXd::Zero(K);
    for (int j = 0; j < std::min(5, K); ++j) h[j] = 0.1;
    WickCompareReport rep = compare_wick_vs_generalized(u, v, h);

    // |g|^2 / m stability runs on the l = 2 twin, where the degree shells
    // fill in fast enough for the ratio to settle; an order-0 streaming
    // solve keeps the memory flat at n = 1e5.
    FkParams gparams = params;
    gparams.coeff_order_cap = 0;
    gparams.wick = true;
    FkPoint gprobe = fk_solve(spec2d, c.horizon, x2, gparams);
    double gstat = gprobe.max_g_sq / m;

    rows.push_back({m, rep.order0_wick, v.coeff_stderr(MultiIndex{}), rep.order0_generalized,
                    u.coeff_stderr(MultiIndex{}), rep.ratio, rep.ratio_se, gstat});
    csv << m << ',' << fmt(rep.order0_wick) << ',' << fmt(v.coeff_stderr(MultiIndex{}))
        << ',' << fmt(rep.order0_generalized) << ',' << fmt(u.coeff_stderr(MultiIndex{}))
        << ',' << fmt(rep.ratio) << ',' << fmt(rep.ratio_se) << ',' << fmt(rep.s_generalized)
        << ',' << fmt(rep.s_wick) << ',' << fmt(rep.outside_reading) << ',' << fmt(gstat)
        << "\n";
  }
  stage.stage("spde_compare_wick.csv", csv.str());

  // Wick order-0 is m-invariant within 3 combined SE.
  double worst_pair = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      double d = std::abs(rows[i].w0 - rows[j].w0);
      double se = std::hypot(rows[i].w0se, rows[j].w0se);
      worst_pair = std::max(worst_pair, se > 0 ? d / (3.0 * se) : (d > 0 ? 1e9 : 0.0));
    }
  checks.push_back(check_le("spde.wick_order0_m_invariant", worst_pair, 1.0));

  // Generalized order-0: ratio >= 1 and nondecreasing on trend.
  bool ratio_ok = true;
  for (const auto& r : rows)
    if (r.ratio < 1.0 - 3.0 * r.ratio_se) ratio_ok = false;
  checks.push_back(check_bool("spde.generalized_ratio_ge_1", ratio_ok));
  if (rows.size() >= 2) {
    const Row& first = rows.front();
    const Row& last = rows.back();
    double allowance = 3.0 * std::hypot(first.ratio_se, last.ratio_se);
    checks.push_back(
        check_ge("spde.generalized_ratio_trend", last.ratio, first.ratio - allowance));
  }

  // |g|^2 / m ensemble maximum stable across the m list.
  double lo = rows.front().gstat, hi = rows.front().gstat;
  for (const auto& r : rows) {
    lo = std::min(lo, r.gstat);
    hi = std::max(hi, r.gstat);
  }
  double variation = hi > 0 ? (hi - lo) / hi : 0.0;
  checks.push_back(check_le("spde.g2_over_m_variation", variation, 0.20));
}

void run_uniqueness(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  SdeSpec spec = spec_from_config(c);
  Eigen::VectorXd x(1);
  x << c.x0;
  FkParams params;
  params.coeff_order_cap = 1;
  params.n_paths = c.n_paths;
  params.dt = c.dt;
  params.threads = c.threads;
  UniquenessReport rep = uniqueness_probe(spec, c.horizon, x, c.m_hi, {c.seed, c.seed2},
                                          params);
  std::ostringstream csv;
  csv << "m,pairing\n";
  for (std::size_t m = 0; m < rep.assoc.pairings.size(); ++m)
    csv << m << ',' << fmt(rep.assoc.pairings[m]) << "\n";
  csv << "tol," << fmt(rep.tol) << "\n";
  stage.stage("uniqueness.csv", csv.str());
  checks.push_back(check_bool("spde.uniqueness_associated", rep.assoc.associated));
}

// ---------------------------------------------------------------------
// eval

void run_eval(const RunConfig& c, Stager& stage, std::vector<Check>& checks) {
  (void)checks;
  auto ast = expr::parse(c.expr_text);
  expr::EvalContext ctx;
  ctx.caps = BasisLayout{c.dim, c.mode_cap, c.order_cap};
  auto result = expr::eval(ast, ctx);
  std::ostringstream out;
  if (std::holds_alternative<double>(result.value)) {
    out << fmt(std::get<double>(result.value)) << "\n";
  } else {
    out << to_text(std::get<ChaosVector>(result.value));
    out << "# tail_mass " << fmt(result.tail_mass) << "\n";
  }
  stage.stage("eval_result.txt", out.str());
}

}  // namespace

namespace {

void validate(const RunConfig& c) {
  if (c.out_dir.empty()) throw std::invalid_argument("config: out_dir must be set");
  if (c.dim < 1 || c.mode_cap < 0 || c.order_cap < 0)
    throw std::invalid_argument("config: bad caps");
  if (c.n_paths < 1) throw std::invalid_argument("config: n_paths must be positive");
  if (!(c.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (c.levels < 4) throw std::invalid_argument("config: need at least 4 levels");
  if (c.mc_samples < 1) throw std::invalid_argument("config: mc_samples must be positive");
  if (!(c.mollify_eps > 0.0)) throw std::invalid_argument("config: eps must be positive");
}

}  // namespace

RunResult run(const RunConfig& config) {
  validate(config);
  RunResult result;
  Stager stage(config.out_dir);

  if (config.subcommand == "hermite-suite")
    run_hermite_suite(config, stage, result.checks);
  else if (config.subcommand == "algebra-suite")
    run_algebra_suite(config, stage, result.checks);
  else if (config.subcommand == "embed-study")
    run_embed_study(config, stage, result.checks);
  else if (config.subcommand == "noise-growth")
    run_noise_growth(config, stage, result.checks);
  else if (config.subcommand == "donsker-check")
    run_donsker_check(config, stage, result.checks);
  else if (config.subcommand == "spde-solve")
    run_spde_solve(config, stage, result.checks);
  else if (config.subcommand == "spde-residual")
    run_spde_residual(config, stage, result.checks);
  else if (config.subcommand == "spde-compare-wick")
    run_spde_compare_wick(config, stage, result.checks);
  else if (config.subcommand == "uniqueness")
    run_uniqueness(config, stage, result.checks);
  else if (config.subcommand == "eval")
    run_eval(config, stage, result.checks);
  else
    throw std::invalid_argument("unknown subcommand '" + config.subcommand + "'");

  if (config.inject_failure)
    result.checks.push_back(check_le("injected-failure", 1.0, 0.0));

  json manifest;
  manifest["config"] = config_json(config);
  manifest["content_hash"] = sha1_hex(manifest["config"].dump());
  json jchecks = json::array();
  bool all_pass = true;
  for (const auto& ch : result.checks) {
    jchecks.push_back({{"name", ch.name},
                       {"value", ch.value},
                       {"bound", ch.bound},
                       {"rel", ch.rel},
                       {"pass", ch.pass}});
    all_pass = all_pass && ch.pass;
  }
  manifest["checks"] = jchecks;
  manifest["pass"] = all_pass;
  stage.stage("manifest.json", manifest.dump(2) + "\n");

  result.artifacts = stage.commit();
  result.manifest_path = (fs::path(config.out_dir) / "manifest.json").string();
  result.exit_code = all_pass ? 0 : 1;
  return result;
}

}  // namespace wnc
