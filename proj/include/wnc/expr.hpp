#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wnc/chaos.hpp"

namespace wnc::expr {

enum class NodeKind { Number, Ident, Basis, Call, Neg, Add, Sub, Mul, Pow, Let };

/// Functions callable from the mini-language. `*` is always the pointwise
/// product; the Wick product is only available as the named call.
enum class CallFn { Wick, Wexp, WhiteNoise, Brownian, Ddelta, Norm, STrans, Expect, Proj };

const char* call_name(CallFn fn);

struct SourceSpan {
  int line = 1;
  int col = 1;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  SourceSpan span;

  double number = 0.0;                         // Number
  std::string ident;                           // Ident
  std::vector<std::pair<int, int>> basis;      // Basis: (mode, power)
  CallFn fn = CallFn::Wick;                    // Call
  std::vector<NodePtr> args;                   // Call
  NodePtr lhs, rhs;                            // binary / Neg (lhs) / Pow base (lhs)
  int exponent = 0;                            // Pow
  std::vector<std::pair<std::string, NodePtr>> bindings;  // Let
  NodePtr body;                                           // Let
};

struct ParseError : std::runtime_error {
  ParseError(std::string msg, int line, int col, std::string expected_set)
      : std::runtime_error(std::move(msg)), line(line), col(col),
        expected(std::move(expected_set)) {}
  int line;
  int col;
  std::string expected;
};

/// Grammar:
///   program := ('let' ident '=' expr ';')* expr
///   expr    := term (('+'|'-') term)*
///   term    := factor ('*' factor)*
///   factor  := primary ('^' uint)?
///   primary := number | ident | 'H[' modepow (',' modepow)* ']'
///            | fn '(' args ')' | '(' expr ')' | '-' primary
///   modepow := uint (':' uint)?
NodePtr parse(const std::string& text);

/// Canonical text; parse(print(ast)) is structurally identical to ast.
std::string print(const NodePtr& ast);

bool structurally_equal(const NodePtr& a, const NodePtr& b);

using Value = std::variant<double, ChaosVector>;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalContext {
  BasisLayout caps{1, 16, 8};
  std::map<std::string, Value> env;
};

struct EvalResult {
  Value value;
  double tail_mass = 0.0;  // of the resulting vector, 0 for reals
};

EvalResult eval(const NodePtr& ast, EvalContext& ctx);

}  // namespace wnc::expr
