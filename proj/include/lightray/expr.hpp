#pragma once

#include <array>
#include <memory>
#include <string>

#include "lightray/errors.hpp"

namespace lightray {

// Arithmetic expressions over the variables t, x, y, z.
//
// Grammar (recursive descent, ^ binds tightest and associates right):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | ident | ident '(' expr (',' expr)? ')' | '(' expr ')'
//
// Functions: exp sin cos log sqrt pow.  Constants: pi, e.  Expressions are
// immutable; derivative() builds a new tree symbolically and folds constants.

class Expr {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  Expr() = default;

  // Evaluates with vars = {t, x, y, z}; missing trailing variables are 0.
  double operator()(const std::array<double, 4>& vars) const;

  // Partial derivative with respect to variable index (0=t, 1=x, 2=y, 3=z).
  Expr derivative(int var) const;

  bool uses_variable(int var) const;
  bool constant() const;         // no variables at all
  std::string str() const;       // canonical text form (used by serializers)

  static Expr constant_value(double v);

  friend Expr parse_expression(const std::string& text);

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

// Throws ExprError with a character position on malformed input.
Expr parse_expression(const std::string& text);

}  // namespace lightray
