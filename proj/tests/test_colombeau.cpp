#include <doctest.h>

#include <cmath>

#include "wnc/colombeau.hpp"
#include "wnc/noise.hpp"
#include "wnc/products.hpp"

using namespace wnc;

namespace {

ChaosVector scalar_vec(const BasisLayout& lay, double c) {
  ChaosVector v(lay);
  if (c != 0.0) v.set_coeff(MultiIndex{}, c);
  return v;
}

}  // namespace

TEST_CASE("embed is the projection family and is linear") {
  BasisLayout lay{1, 4, 12};
  Eigen::VectorXd g(2);
  g << 0.4, -0.3;
  ChaosVector f = wick_exp(lay, g);
  GenSequence s = embed(f, 12);
  CHECK(s.levels() == 13);
  for (int m = 0; m <= 12; ++m) CHECK(s.terms[m] == project_order(f, m));

  ChaosVector h = from_first_order(lay, g);
  GenSequence sum = embed(f + h, 8);
  for (int m = 0; m <= 8; ++m) {
    ChaosVector want = project_order(f, m) + project_order(h, m);
    CHECK(sum.terms[m] == want);
  }
  CHECK_THROWS_AS(embed(f, 2), std::invalid_argument);

  // embed(H_0) keeps every term equal to H_0.
  ChaosVector one = scalar_vec(lay, 1.0);
  GenSequence c = embed(one, 6);
  for (const auto& t : c.terms) CHECK(t == one);
}

TEST_CASE("classification verdicts on closed-form sequences") {
  BasisLayout lay{1, 2, 1};
  const int M = 12;
  ClassifyOptions opts;

  SUBCASE("zero sequence is negligible by convention") {
    GenSequence z;
    z.meta = "zero";
    for (int m = 0; m <= M; ++m) z.terms.push_back(ChaosVector(lay));
    auto rep = classify(z, {0, 1}, opts);
    for (const auto& r : rep) CHECK(r.verdict == Verdict::negligible);
  }

  SUBCASE("e^{-m^2} H_0 is negligible") {
    GenNumber x;
    x.values.resize(M + 1);
    for (int m = 0; m <= M; ++m) x.values[m] = std::exp(-static_cast<double>(m) * m);
    GrowthReport r = gen_number_classify(x, opts);
    CHECK(r.verdict == Verdict::negligible);
  }

  SUBCASE("constant sequence is moderate with rate about zero") {
    GenNumber x;
    x.values = Eigen::VectorXd::Constant(M + 1, 2.5);
    GrowthReport r = gen_number_classify(x, opts);
    CHECK(r.verdict == Verdict::moderate);
    CHECK(std::abs(r.rate) <= 1e-9);
    CHECK(r.constant == doctest::Approx(2.5).epsilon(1e-9));
  }

  SUBCASE("polynomial growth is moderate") {
    GenNumber x;
    x.values.resize(M + 1);
    for (int m = 0; m <= M; ++m) x.values[m] = m;
    GrowthReport r = gen_number_classify(x, opts);
    CHECK(r.verdict == Verdict::moderate);
  }

  SUBCASE("e^{m^2} H_0 exceeds every exponential: unknown") {
    GenSequence s;
    s.meta = "super";
    for (int m = 0; m <= M; ++m)
      s.terms.push_back(scalar_vec(lay, std::exp(static_cast<double>(m) * m)));
    auto rep = classify(s, {0}, opts);
    CHECK(rep[0].verdict == Verdict::unknown);
  }

  SUBCASE("moderate C bound actually bounds the sequence") {
    GenNumber x;
    x.values.resize(M + 1);
    for (int m = 0; m <= M; ++m) x.values[m] = 0.3 * std::exp(0.8 * m);
    GrowthReport r = gen_number_classify(x, opts);
    CHECK(r.verdict == Verdict::moderate);
    CHECK(r.rate == doctest::Approx(0.8).epsilon(1e-6));
    for (int m = 0; m <= M; ++m)
      CHECK(x.values[m] <= r.constant * std::exp(r.rate * m) * (1 + 1e-12));
  }
}

TEST_CASE("embedded test elements are negligible differences (iota(phi) = [phi])") {
  // Tail of a Wick exponential with tiny |f| passes every decay probe at
  // M = 32; predicted by the closed form sum_{n>m} e^{2pn} |f|^{2n}/n!.
  BasisLayout lay{1, 2, 40};
  Eigen::VectorXd g(2);
  double scale = 5e-5;
  g << scale * 0.6, scale * 0.8;
  ChaosVector f = wick_exp(lay, g);
  const int M = 32;
  GenSequence diff;
  diff.meta = "iota(phi)-phi";
  for (int m = 0; m <= M; ++m) diff.terms.push_back(project_order(f, m) - f);
  auto rep = classify(diff, {0, 1, 2});
  for (const auto& r : rep) CHECK(r.verdict == Verdict::negligible);
}

TEST_CASE("embedding growth rate follows p + q for the geometric element") {
  // c_{n e_0} = e^{qn}/(n+1) (n!)^{-1/2}: ||Pi_m F||_p^2 =
  // sum_{n<=m} e^{2(p+q)n}/(n+1)^2, so the fitted rate approaches p + q.
  const double q = 0.5;
  const int M = 24;
  BasisLayout lay{1, 1, M + 1};
  ChaosVector f(lay);
  for (int n = 0; n <= M; ++n) {
    double c = std::exp(q * n) / (n + 1.0) * std::exp(-0.5 * std::lgamma(n + 1.0));
    f.set_coeff(MultiIndex::unit(0, n), c);
  }
  GenSequence s = embed(f, M);
  for (int p : {0, 1}) {
    auto rep = classify(s, {p});
    CHECK(rep[0].verdict == Verdict::moderate);
    CHECK(rep[0].rate == doctest::Approx(p + q).epsilon(0.08));
  }
}

TEST_CASE("white-noise sequence is moderate with small rate") {
  const int M = 24;
  BasisLayout lay{1, M + 1, 1};
  Eigen::VectorXd x(1);
  x << 0.7;
  GenSequence w;
  w.meta = "white-noise";
  for (int m = 0; m <= M; ++m) w.terms.push_back(white_noise(lay, x, m));
  auto rep = classify(w, {0, 1, 2});
  for (const auto& r : rep) {
    CHECK(r.verdict == Verdict::moderate);
    CHECK(r.rate <= 0.1);
  }
}

TEST_CASE("associated_limit") {
  BasisLayout lay{1, 6, 10};
  Eigen::VectorXd g(3);
  g << 0.5, -0.2, 0.3;
  ChaosVector f = wick_exp(lay, g);
  ChaosVector h0 = scalar_vec(lay, 1.0);

  SUBCASE("a sequence is associated to itself with limit zero") {
    GenSequence s = embed(f, 10);
    auto rep = associated_limit(s, s, h0, 1e-12);
    CHECK(rep.associated);
    CHECK(rep.limit == 0.0);
  }

  SUBCASE("distinct embedded elements are separated by some Hermite test") {
    ChaosVector other = wick_exp(lay, 0.5 * g);
    GenSequence s = embed(f, 10);
    GenSequence t = embed(other, 10);
    // The H_{e_0} test vector sees the differing order-1 coefficients.
    ChaosVector test(lay);
    test.set_coeff(MultiIndex::unit(0), 1.0);
    auto rep = associated_limit(s, t, test, 1e-9);
    CHECK_FALSE(rep.associated);
  }

  SUBCASE("stage products are associated to the full product") {
    ChaosVector a = from_first_order(lay, g);
    ChaosVector b = wick_exp(lay, 0.4 * g);
    ChaosVector full = mul(a, b);
    GenSequence stages, constant;
    stages.meta = "stage";
    constant.meta = "full";
    for (int m = 0; m <= 10; ++m) {
      stages.terms.push_back(product_seq(a, b, ProductKind::sym, m));
      constant.terms.push_back(full);
    }
    auto rep = associated_limit(stages, constant, h0, 1e-10);
    CHECK(rep.associated);
  }
}

TEST_CASE("association behaves like an equivalence on tested triples") {
  BasisLayout lay{1, 4, 12};
  Eigen::VectorXd g(2);
  g << 0.4, 0.2;
  ChaosVector f = wick_exp(lay, g);
  ChaosVector h0(lay);
  h0.set_coeff(MultiIndex{}, 1.0);

  GenSequence s = embed(f, 10);
  GenSequence t = embed(f + 1e-12 * h0, 10);
  GenSequence u = embed(f - 1e-12 * h0, 10);
  const double tol = 1e-10;

  // Reflexive exactly.
  CHECK(associated_limit(s, s, h0, tol).associated);
  // Symmetric exactly: pairings flip sign, verdicts match.
  auto st = associated_limit(s, t, h0, tol);
  auto ts = associated_limit(t, s, h0, tol);
  CHECK(st.associated == ts.associated);
  CHECK(st.limit == -ts.limit);
  // Transitive under tolerance doubling.
  auto tu = associated_limit(t, u, h0, 2.0 * tol);
  REQUIRE(st.associated);
  REQUIRE(associated_limit(s, u, h0, tol).associated);
  CHECK(tu.associated);
}

TEST_CASE("generalized expectation and the quotient consistency") {
  BasisLayout lay{1, 4, 16};
  Eigen::VectorXd g(2);
  g << 0.3, 0.4;
  ChaosVector f = wick_exp(lay, g);

  GenSequence s = embed(f, 12);
  GenNumber ex = gen_expectation(s);
  // Every projection keeps the order-0 coefficient 1.
  for (int m = 0; m <= 12; ++m) CHECK(ex.values[m] == 1.0);

  // classify(s - t) negligible implies the expectation difference is
  // negligible (|E phi_m| <= ||phi_m||_p coordinatewise).
  GenSequence t = embed(f, 12);
  GenSequence d;
  d.meta = "s-t";
  GenNumber exd;
  exd.values.resize(13);
  for (int m = 0; m <= 12; ++m) {
    d.terms.push_back(s.terms[m] - t.terms[m]);
    exd.values[m] = expectation(d.terms[m]);
  }
  auto rep = classify(d, {0});
  REQUIRE(rep[0].verdict == Verdict::negligible);
  CHECK(gen_number_classify(exd).verdict == Verdict::negligible);
}

TEST_CASE("ideal property at the data level") {
  // s moderate, n negligible termwise product stays negligible within caps.
  BasisLayout lay{1, 4, 24};
  const int M = 12;
  Eigen::VectorXd g(2);
  g << 0.5, 0.1;
  GenSequence s, nseq, prod;
  s.meta = "moderate";
  nseq.meta = "negligible";
  prod.meta = "product";
  ChaosVector base = wick_exp(lay, g);
  for (int m = 0; m <= M; ++m) {
    ChaosVector sm = project_order(base, std::min(m, 6));
    ChaosVector nm = std::exp(-static_cast<double>(m) * m) * project_order(base, 2);
    s.terms.push_back(sm);
    nseq.terms.push_back(nm);
    prod.terms.push_back(mul(sm, nm));
  }
  auto rs = classify(s, {0});
  auto rn = classify(nseq, {0});
  auto rp = classify(prod, {0});
  CHECK(rs[0].verdict == Verdict::moderate);
  CHECK(rn[0].verdict == Verdict::negligible);
  CHECK(rp[0].verdict == Verdict::negligible);
}

TEST_CASE("growth report CSV row shape") {
  GrowthReport r;
  r.label = "demo";
  r.p = 1;
  r.rate = 0.25;
  r.constant = 2.0;
  r.residual = 0.01;
  r.verdict = Verdict::moderate;
  CHECK(growth_csv_row(r) == "demo,1,0.25,2,0.01,moderate");
}
