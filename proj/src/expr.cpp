#include "wnc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wnc/noise.hpp"
#include "wnc/products.hpp"

namespace wnc::expr {

const char* call_name(CallFn fn) {
  switch (fn) {
    case CallFn::Wick: return "wick";
    case CallFn::Wexp: return "wexp";
    case CallFn::WhiteNoise: return "W";
    case CallFn::Brownian: return "B";
    case CallFn::Ddelta: return "ddelta";
    case CallFn::Norm: return "norm";
    case CallFn::STrans: return "S";
    case CallFn::Expect: return "E";
    case CallFn::Proj: return "proj";
  }
  return "?";
}

namespace {

bool lookup_fn(const std::string& name, CallFn& out) {
  static const std::pair<const char*, CallFn> table[] = {
      {"wick", CallFn::Wick},      {"wexp", CallFn::Wexp}, {"W", CallFn::WhiteNoise},
      {"B", CallFn::Brownian},     {"ddelta", CallFn::Ddelta}, {"norm", CallFn::Norm},
      {"S", CallFn::STrans},       {"E", CallFn::Expect},  {"proj", CallFn::Proj},
  };
  for (const auto& [n, f] : table)
    if (name == n) {
      out = f;
      return true;
    }
  return false;
}

struct Token {
  enum Kind { Num, Ident, Sym, End } kind = End;
  std::string text;
  double num = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) bump();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= s_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '.'))
        bump();
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_;
        bump();
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) bump();
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
        } else {
          pos_ = save;  // not an exponent after all
        }
      }
      tok_.kind = Token::Num;
      tok_.text = s_.substr(start, pos_ - start);
      tok_.num = std::strtod(tok_.text.c_str(), nullptr);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '_'))
        bump();
      tok_.kind = Token::Ident;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    static const std::string syms = "+-*^()[],:;=";
    if (syms.find(c) != std::string::npos) {
      tok_.kind = Token::Sym;
      tok_.text = std::string(1, c);
      bump();
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line_, col_,
                     "token");
  }

  void bump() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  NodePtr program() {
    std::vector<std::pair<std::string, NodePtr>> bindings;
    while (lex_.peek().kind == Token::Ident && lex_.peek().text == "let") {
      lex_.take();
      Token name = expect_ident();
      expect_sym("=");
      NodePtr value = expr();
      expect_sym(";");
      bindings.push_back({name.text, value});
    }
    NodePtr body = expr();
    if (lex_.peek().kind != Token::End)
      fail("end of input", lex_.peek());
    if (bindings.empty()) return body;
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Let;
    n->bindings = std::move(bindings);
    n->body = body;
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (is_sym("+") || is_sym("-")) {
      Token op = lex_.take();
      NodePtr rhs = term();
      auto n = std::make_shared<Node>();
      n->kind = op.text == "+" ? NodeKind::Add : NodeKind::Sub;
      n->span = {op.line, op.col};
      n->lhs = lhs;
      n->rhs = rhs;
      lhs = n;
    }
    return lhs;
  }

 private:
  NodePtr term() {
    NodePtr lhs = factor();
    while (is_sym("*")) {
      Token op = lex_.take();
      NodePtr rhs = factor();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Mul;
      n->span = {op.line, op.col};
      n->lhs = lhs;
      n->rhs = rhs;
      lhs = n;
    }
    return lhs;
  }

  NodePtr factor() {
    NodePtr base = primary();
    if (is_sym("^")) {
      Token op = lex_.take();
      Token e = lex_.peek();
      if (e.kind != Token::Num || e.text.find('.') != std::string::npos ||
          e.text.find('e') != std::string::npos || e.text.find('E') != std::string::npos)
        fail("nonnegative integer exponent", e);
      lex_.take();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Pow;
      n->span = {op.line, op.col};
      n->lhs = base;
      n->exponent = static_cast<int>(e.num);
      return n;
    }
    return base;
  }

  NodePtr primary() {
    Token t = lex_.peek();
    if (t.kind == Token::Sym && t.text == "-") {
      lex_.take();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Neg;
      n->span = {t.line, t.col};
      n->lhs = primary();
      return n;
    }
    if (t.kind == Token::Num) {
      lex_.take();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Number;
      n->span = {t.line, t.col};
      n->number = t.num;
      return n;
    }
    if (t.kind == Token::Sym && t.text == "(") {
      lex_.take();
      NodePtr inner = expr();
      expect_sym(")");
      return inner;
    }
    if (t.kind == Token::Ident) {
      lex_.take();
      if (t.text == "H" && is_sym("[")) return basis(t);
      if (is_sym("(")) {
        CallFn fn;
        if (!lookup_fn(t.text, fn)) fail("known function name", t);
        lex_.take();
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Call;
        n->span = {t.line, t.col};
        n->fn = fn;
        if (!is_sym(")")) {
          n->args.push_back(expr());
          while (is_sym(",")) {
            lex_.take();
            n->args.push_back(expr());
          }
        }
        expect_sym(")");
        return n;
      }
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Ident;
      n->span = {t.line, t.col};
      n->ident = t.text;
      return n;
    }
    fail("number, identifier, 'H[', function call or '('", t);
    return nullptr;
  }

  NodePtr basis(const Token& h) {
    expect_sym("[");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Basis;
    n->span = {h.line, h.col};
    n->basis.push_back(modepow());
    while (is_sym(",")) {
      lex_.take();
      n->basis.push_back(modepow());
    }
    expect_sym("]");
    return n;
  }

  std::pair<int, int> modepow() {
    Token m = lex_.peek();
    if (m.kind != Token::Num || m.text.find_first_of(".eE") != std::string::npos)
      fail("mode number", m);
    lex_.take();
    int mode = static_cast<int>(m.num);
    int power = 1;
    if (is_sym(":")) {
      lex_.take();
      Token p = lex_.peek();
      if (p.kind != Token::Num || p.text.find_first_of(".eE") != std::string::npos)
        fail("power", p);
      lex_.take();
      power = static_cast<int>(p.num);
    }
    return {mode, power};
  }

  bool is_sym(const char* s) const {
    return lex_.peek().kind == Token::Sym && lex_.peek().text == s;
  }

  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("'") + s + "'", lex_.peek());
    lex_.take();
  }

  Token expect_ident() {
    Token t = lex_.peek();
    if (t.kind != Token::Ident) fail("identifier", t);
    return lex_.take();
  }

  [[noreturn]] void fail(const std::string& expected, const Token& at) {
    std::string got = at.kind == Token::End ? "end of input" : "'" + at.text + "'";
    throw ParseError("expected " + expected + ", got " + got + " at line " +
                         std::to_string(at.line) + ", column " + std::to_string(at.col),
                     at.line, at.col, expected);
  }

  Lexer lex_;
};

}  // namespace

NodePtr parse(const std::string& text) {
  if (text.size() > (1u << 20)) throw ParseError("input exceeds 1 MB", 1, 1, "shorter input");
  Parser p(text);
  return p.program();
}

namespace {

bool is_atom(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Number:
    case NodeKind::Ident:
    case NodeKind::Basis:
    case NodeKind::Call:
      return true;
    default:
      return false;
  }
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
      return 2;
    case NodeKind::Pow:
    case NodeKind::Neg:
      return 3;
    default:
      return 4;
  }
}

void print_rec(const NodePtr& n, std::ostringstream& os, int parent_prec) {
  int prec = precedence(n->kind);
  bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (n->kind) {
    case NodeKind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n->number);
      os << buf;
      break;
    }
    case NodeKind::Ident:
      os << n->ident;
      break;
    case NodeKind::Basis: {
      os << "H[";
      for (std::size_t i = 0; i < n->basis.size(); ++i) {
        if (i) os << ", ";
        os << n->basis[i].first;
        if (n->basis[i].second != 1) os << ':' << n->basis[i].second;
      }
      os << ']';
      break;
    }
    case NodeKind::Call: {
      os << call_name(n->fn) << '(';
      for (std::size_t i = 0; i < n->args.size(); ++i) {
        if (i) os << ", ";
        print_rec(n->args[i], os, 0);
      }
      os << ')';
      break;
    }
    case NodeKind::Neg:
      os << '-';
      if (is_atom(n->lhs))
        print_rec(n->lhs, os, 0);
      else {
        os << '(';
        print_rec(n->lhs, os, 0);
        os << ')';
      }
      break;
    case NodeKind::Add:
    case NodeKind::Sub:
      print_rec(n->lhs, os, 1);
      os << (n->kind == NodeKind::Add ? " + " : " - ");
      // Left-associative: the right child needs parens at equal precedence.
      print_rec(n->rhs, os, 2);
      break;
    case NodeKind::Mul:
      print_rec(n->lhs, os, 2);
      os << " * ";
      print_rec(n->rhs, os, 3);
      break;
    case NodeKind::Pow:
      // The base of '^' must be a primary.
      if (is_atom(n->lhs))
        print_rec(n->lhs, os, 0);
      else {
        os << '(';
        print_rec(n->lhs, os, 0);
        os << ')';
      }
      os << '^' << n->exponent;
      break;
    case NodeKind::Let:
      for (const auto& [name, value] : n->bindings) {
        os << "let " << name << " = ";
        print_rec(value, os, 0);
        os << ";\n";
      }
      print_rec(n->body, os, 0);
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string print(const NodePtr& ast) {
  std::ostringstream os;
  print_rec(ast, os, 0);
  return os.str();
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Number:
      return a->number == b->number;
    case NodeKind::Ident:
      return a->ident == b->ident;
    case NodeKind::Basis:
      return a->basis == b->basis;
    case NodeKind::Call:
      if (a->fn != b->fn || a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!structurally_equal(a->args[i], b->args[i])) return false;
      return true;
    case NodeKind::Neg:
      return structurally_equal(a->lhs, b->lhs);
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
      return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    case NodeKind::Pow:
      return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case NodeKind::Let: {
      if (a->bindings.size() != b->bindings.size()) return false;
      for (std::size_t i = 0; i < a->bindings.size(); ++i) {
        if (a->bindings[i].first != b->bindings[i].first) return false;
        if (!structurally_equal(a->bindings[i].second, b->bindings[i].second)) return false;
      }
      return structurally_equal(a->body, b->body);
    }
  }
  return false;
}

namespace {

ChaosVector promote(const Value& v, const BasisLayout& caps) {
  if (std::holds_alternative<ChaosVector>(v)) return std::get<ChaosVector>(v);
  ChaosVector cv(caps);
  double c = std::get<double>(v);
  if (c != 0.0) cv.set_coeff(MultiIndex{}, c);
  return cv;
}

double need_number(const Value& v, const char* what) {
  if (!std::holds_alternative<double>(v))
    throw EvalError(std::string("expected a number for ") + what);
  return std::get<double>(v);
}

// Order-1 coefficient vector of a chaos element with max order <= 1.
Eigen::VectorXd first_order_vector(const ChaosVector& cv, const char* what) {
  if (cv.max_order() > 1)
    throw EvalError(std::string(what) + ": argument must have chaos order <= 1");
  int maxm = -1;
  for (const auto& [mi, c] : cv.coeffs()) maxm = std::max(maxm, mi.max_mode());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(maxm + 1);
  for (const auto& [mi, c] : cv.coeffs())
    if (mi.order() == 1) g[mi.terms().front().first] = c;
  return g;
}

Value eval_rec(const NodePtr& n, EvalContext& ctx);

Value eval_call(const NodePtr& n, EvalContext& ctx) {
  auto arity = [&](std::size_t want) {
    if (n->args.size() != want)
      throw EvalError(std::string(call_name(n->fn)) + ": expected " + std::to_string(want) +
                      " argument(s), got " + std::to_string(n->args.size()));
  };
  switch (n->fn) {
    case CallFn::Wick: {
      arity(2);
      ChaosVector a = promote(eval_rec(n->args[0], ctx), ctx.caps);
      ChaosVector b = promote(eval_rec(n->args[1], ctx), ctx.caps);
      return wick(a, b);
    }
    case CallFn::Wexp: {
      arity(1);
      ChaosVector a = promote(eval_rec(n->args[0], ctx), ctx.caps);
      double c0 = expectation(a);
      Eigen::VectorXd g = first_order_vector(a, "wexp");
      ChaosVector w = wick_exp(ctx.caps, g);
      return std::exp(c0) * w;
    }
    case CallFn::WhiteNoise: {
      int d = ctx.caps.dim;
      arity(static_cast<std::size_t>(d) + 1);
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i) x[i] = need_number(eval_rec(n->args[i], ctx), "W point");
      int m = static_cast<int>(need_number(eval_rec(n->args[d], ctx), "W level"));
      return white_noise(ctx.caps, x, m);
    }
    case CallFn::Brownian: {
      arity(2);
      if (ctx.caps.dim != 1) throw EvalError("B: needs a d = 1 layout");
      double t = need_number(eval_rec(n->args[0], ctx), "B time");
      int J = static_cast<int>(need_number(eval_rec(n->args[1], ctx), "B modes"));
      return brownian(ctx.caps, t, J);
    }
    case CallFn::Ddelta: {
      arity(2);
      if (ctx.caps.dim != 1) throw EvalError("ddelta: needs a d = 1 layout");
      double a = need_number(eval_rec(n->args[0], ctx), "ddelta level");
      double t = need_number(eval_rec(n->args[1], ctx), "ddelta time");
      return donsker_delta(a, t, ctx.caps.order_cap, ctx.caps.mode_cap);
    }
    case CallFn::Norm: {
      arity(2);
      ChaosVector a = promote(eval_rec(n->args[0], ctx), ctx.caps);
      double p = need_number(eval_rec(n->args[1], ctx), "norm index");
      return norm(a, static_cast<int>(p));
    }
    case CallFn::STrans: {
      arity(2);
      ChaosVector a = promote(eval_rec(n->args[0], ctx), ctx.caps);
      ChaosVector phi = promote(eval_rec(n->args[1], ctx), ctx.caps);
      return s_transform(a, first_order_vector(phi, "S"));
    }
    case CallFn::Expect: {
      arity(1);
      Value v = eval_rec(n->args[0], ctx);
      if (std::holds_alternative<double>(v)) return std::get<double>(v);
      return expectation(std::get<ChaosVector>(v));
    }
    case CallFn::Proj: {
      arity(2);
      ChaosVector a = promote(eval_rec(n->args[0], ctx), ctx.caps);
      double m = need_number(eval_rec(n->args[1], ctx), "proj order");
      return project_order(a, static_cast<int>(m));
    }
  }
  throw EvalError("unhandled call");
}

Value eval_rec(const NodePtr& n, EvalContext& ctx) {
  switch (n->kind) {
    case NodeKind::Number:
      return n->number;
    case NodeKind::Ident: {
      auto it = ctx.env.find(n->ident);
      if (it == ctx.env.end())
        throw EvalError("unbound identifier '" + n->ident + "' at line " +
                        std::to_string(n->span.line) + ", column " +
                        std::to_string(n->span.col));
      return it->second;
    }
    case NodeKind::Basis: {
      ChaosVector cv(ctx.caps);
      MultiIndex mi;
      for (const auto& [mode, pw] : n->basis) mi = mi.plus(MultiIndex::unit(mode, pw));
      cv.set_coeff(mi, 1.0);
      return cv;
    }
    case NodeKind::Call:
      return eval_call(n, ctx);
    case NodeKind::Neg: {
      Value v = eval_rec(n->lhs, ctx);
      if (std::holds_alternative<double>(v)) return -std::get<double>(v);
      return -std::get<ChaosVector>(v);
    }
    case NodeKind::Add:
    case NodeKind::Sub: {
      Value a = eval_rec(n->lhs, ctx);
      Value b = eval_rec(n->rhs, ctx);
      double sign = n->kind == NodeKind::Add ? 1.0 : -1.0;
      if (std::holds_alternative<double>(a) && std::holds_alternative<double>(b))
        return std::get<double>(a) + sign * std::get<double>(b);
      return promote(a, ctx.caps) + sign * promote(b, ctx.caps);
    }
    case NodeKind::Mul: {
      Value a = eval_rec(n->lhs, ctx);
      Value b = eval_rec(n->rhs, ctx);
      if (std::holds_alternative<double>(a) && std::holds_alternative<double>(b))
        return std::get<double>(a) * std::get<double>(b);
      if (std::holds_alternative<double>(a))
        return std::get<double>(a) * std::get<ChaosVector>(b);
      if (std::holds_alternative<double>(b))
        return std::get<double>(b) * std::get<ChaosVector>(a);
      return mul(std::get<ChaosVector>(a), std::get<ChaosVector>(b));
    }
    case NodeKind::Pow: {
      Value a = eval_rec(n->lhs, ctx);
      if (n->exponent < 0) throw EvalError("negative exponent");
      if (std::holds_alternative<double>(a))
        return std::pow(std::get<double>(a), n->exponent);
      const ChaosVector& base = std::get<ChaosVector>(a);
      ChaosVector acc(base.layout());
      acc.set_coeff(MultiIndex{}, 1.0);
      for (int k = 0; k < n->exponent; ++k) acc = mul(acc, base);
      return acc;
    }
    case NodeKind::Let: {
      EvalContext scoped = ctx;
      for (const auto& [name, value] : n->bindings)
        scoped.env[name] = eval_rec(value, scoped);
      return eval_rec(n->body, scoped);
    }
  }
  throw EvalError("unhandled node");
}

}  // namespace

EvalResult eval(const NodePtr& ast, EvalContext& ctx) {
  EvalResult r;
  r.value = eval_rec(ast, ctx);
  if (std::holds_alternative<ChaosVector>(r.value))
    r.tail_mass = std::get<ChaosVector>(r.value).tail_mass();
  return r;
}

}  // namespace wnc::expr
