#include <doctest.h>

#include <cmath>
#include <random>

#include "wnc/expr.hpp"
#include "wnc/products.hpp"

using namespace wnc;
using namespace wnc::expr;

namespace {

EvalContext make_ctx() {
  EvalContext ctx;
  ctx.caps = BasisLayout{1, 16, 10};
  return ctx;
}

double as_number(const Value& v) {
  REQUIRE(std::holds_alternative<double>(v));
  return std::get<double>(v);
}

const ChaosVector& as_vector(const Value& v) {
  REQUIRE(std::holds_alternative<ChaosVector>(v));
  return std::get<ChaosVector>(v);
}

// Random AST generator over the full grammar.
NodePtr random_ast(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 8);
  auto n = std::make_shared<Node>();
  switch (pick(rng)) {
    case 0: {
      n->kind = NodeKind::Number;
      std::uniform_real_distribution<double> num(0.0, 8.0);
      n->number = num(rng);
      return n;
    }
    case 1: {
      n->kind = NodeKind::Ident;
      const char* names[] = {"f", "g", "phi", "x_1"};
      n->ident = names[rng() % 4];
      return n;
    }
    case 2: {
      n->kind = NodeKind::Basis;
      int parts = 1 + rng() % 2;
      int mode = 0;
      for (int i = 0; i < parts; ++i) {
        mode += static_cast<int>(rng() % 3);
        n->basis.push_back({mode, 1 + static_cast<int>(rng() % 3)});
        mode += 1;
      }
      return n;
    }
    case 3:
      n->kind = NodeKind::Neg;
      n->lhs = random_ast(rng, depth - 1);
      return n;
    case 4:
    case 5: {
      n->kind = (rng() % 2) ? NodeKind::Add : NodeKind::Sub;
      n->lhs = random_ast(rng, depth - 1);
      n->rhs = random_ast(rng, depth - 1);
      return n;
    }
    case 6: {
      n->kind = NodeKind::Mul;
      n->lhs = random_ast(rng, depth - 1);
      n->rhs = random_ast(rng, depth - 1);
      return n;
    }
    case 7: {
      n->kind = NodeKind::Pow;
      n->lhs = random_ast(rng, depth - 1);
      n->exponent = static_cast<int>(rng() % 4);
      return n;
    }
    default: {
      n->kind = NodeKind::Call;
      static const CallFn fns[] = {CallFn::Wick, CallFn::Wexp,  CallFn::Norm,
                                   CallFn::STrans, CallFn::Expect, CallFn::Proj,
                                   CallFn::Brownian};
      n->fn = fns[rng() % 7];
      std::size_t arity = (n->fn == CallFn::Wexp || n->fn == CallFn::Expect) ? 1 : 2;
      for (std::size_t i = 0; i < arity; ++i) n->args.push_back(random_ast(rng, depth - 1));
      return n;
    }
  }
}

}  // namespace

TEST_CASE("parse shapes") {
  NodePtr h = parse("H[0]");
  CHECK(h->kind == NodeKind::Basis);
  REQUIRE(h->basis.size() == 1);
  CHECK(h->basis[0] == std::pair<int, int>{0, 1});

  NodePtr w = parse("wick(H[0], H[0]) + 1");
  CHECK(w->kind == NodeKind::Add);
  CHECK(w->lhs->kind == NodeKind::Call);
  CHECK(w->lhs->fn == CallFn::Wick);
  CHECK(w->rhs->kind == NodeKind::Number);

  NodePtr m = parse("H[0:2, 3] * 2 ^ 3");
  CHECK(m->kind == NodeKind::Mul);
  CHECK(m->lhs->basis[0] == std::pair<int, int>{0, 2});
  CHECK(m->lhs->basis[1] == std::pair<int, int>{3, 1});
  CHECK(m->rhs->kind == NodeKind::Pow);

  NodePtr l = parse("let a = 2; let b = a + 1; a * b");
  CHECK(l->kind == NodeKind::Let);
  CHECK(l->bindings.size() == 2);
}

TEST_CASE("precedence: ^ over * over +/-") {
  NodePtr e = parse("1 + 2 * 3 ^ 2");
  CHECK(e->kind == NodeKind::Add);
  CHECK(e->rhs->kind == NodeKind::Mul);
  CHECK(e->rhs->rhs->kind == NodeKind::Pow);
  EvalContext ctx = make_ctx();
  CHECK(as_number(eval(e, ctx).value) == 19.0);

  // Left associativity of subtraction.
  CHECK(as_number(eval(parse("10 - 4 - 3"), ctx).value) == 3.0);
}

TEST_CASE("syntax errors carry position and expectation") {
  try {
    parse("wick(H[0], ");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.col > 0);
    CHECK(!e.expected.empty());
  }
  CHECK_THROWS_AS(parse("H[0] @ 2"), ParseError);
  CHECK_THROWS_AS(parse("unknownfn(1)"), ParseError);
  CHECK_THROWS_AS(parse("2 ^ 1.5"), ParseError);
}

TEST_CASE("eval semantics on the chaos algebra") {
  EvalContext ctx = make_ctx();

  // E(wexp(f)) = 1 for any first-order f.
  ctx.env["f"] = from_first_order(ctx.caps, Eigen::Vector2d(0.4, -0.3));
  CHECK(as_number(eval(parse("E(wexp(f))"), ctx).value) == doctest::Approx(1.0).epsilon(1e-12));

  // norm(H[0:1], 0)^2 = 1.
  double n = as_number(eval(parse("norm(H[0:1], 0)"), ctx).value);
  CHECK(n * n == doctest::Approx(1.0).epsilon(1e-12));

  // H[0] * H[0] = H[0:2] + 1.
  EvalResult sq_r = eval(parse("H[0] * H[0]"), ctx);
  const ChaosVector& sq = as_vector(sq_r.value);
  CHECK(sq.coeff(MultiIndex::unit(0, 2)) == 1.0);
  CHECK(sq.coeff(MultiIndex{}) == 1.0);

  // S-transform multiplicativity of wick through the language.
  ctx.env["F"] = as_vector(eval(parse("H[0:2] + H[1]"), ctx).value);
  ctx.env["G"] = as_vector(eval(parse("H[0] - 2 * H[2]"), ctx).value);
  ctx.env["phi"] = from_first_order(ctx.caps, Eigen::Vector3d(0.3, -0.2, 0.5));
  double resid = as_number(
      eval(parse("S(wick(F, G), phi) - S(F, phi) * S(G, phi)"), ctx).value);
  CHECK(std::abs(resid) <= 1e-10);

  // proj truncates.
  EvalResult pr_r = eval(parse("proj(H[0:3] + H[1], 1)"), ctx);
  CHECK(as_vector(pr_r.value).size() == 1);

  // Numbers promote to multiples of H_0 inside vector arithmetic.
  EvalResult s_r = eval(parse("wick(H[0], H[0]) + 1"), ctx);
  const ChaosVector& s = as_vector(s_r.value);
  CHECK(s.coeff(MultiIndex{}) == 1.0);
  CHECK(s.coeff(MultiIndex::unit(0, 2)) == 1.0);
}

TEST_CASE("eval errors") {
  EvalContext ctx = make_ctx();
  CHECK_THROWS_AS(eval(parse("nope + 1"), ctx), EvalError);
  CHECK_THROWS_AS(eval(parse("wexp(H[0:2])"), ctx), EvalError);  // order 2 argument
  CHECK_THROWS_AS(eval(parse("norm(H[0], H[0])"), ctx), EvalError);
  CHECK_THROWS_AS(eval(parse("wick(H[0])"), ctx), EvalError);
}

TEST_CASE("let bindings evaluate in order and shadow the environment") {
  EvalContext ctx = make_ctx();
  ctx.env["a"] = 100.0;
  double v = as_number(eval(parse("let a = 2; let b = a * 3; a + b"), ctx).value);
  CHECK(v == 8.0);
  CHECK(std::get<double>(ctx.env["a"]) == 100.0);  // outer env untouched
}

TEST_CASE("print/parse round-trip on random expression corpus") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    NodePtr ast = random_ast(rng, 4);
    std::string text = print(ast);
    NodePtr back;
    try {
      back = parse(text);
    } catch (const ParseError& e) {
      CAPTURE(text);
      FAIL("round-trip parse failed: " << e.what());
      continue;
    }
    CAPTURE(text);
    CHECK(structurally_equal(ast, back));
  }
}

TEST_CASE("eval determinism") {
  EvalContext ctx = make_ctx();
  NodePtr ast = parse("norm(wexp(H[0] - H[1]) * H[2], 1)");
  double a = as_number(eval(ast, ctx).value);
  double b = as_number(eval(ast, ctx).value);
  CHECK(a == b);
}
