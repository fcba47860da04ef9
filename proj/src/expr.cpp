#include "lightray/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace lightray {

enum class Op {
  kConst,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kExp,
  kSin,
  kCos,
  kLog,
  kSqrt,
};

struct Expr::Node {
  Op op = Op::kConst;
  double value = 0.0;  // kConst
  int var = 0;         // kVar
  NodePtr lhs, rhs;
};

namespace {

using NodePtr = Expr::NodePtr;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

NodePtr make_var(int var) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::kVar;
  n->var = var;
  return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::kConst && n->value == v;
}

double eval_node(const Expr::Node& n, const std::array<double, 4>& vars) {
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kVar: return vars[static_cast<size_t>(n.var)];
    case Op::kAdd: return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
    case Op::kSub: return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
    case Op::kMul: return eval_node(*n.lhs, vars) * eval_node(*n.rhs, vars);
    case Op::kDiv: return eval_node(*n.lhs, vars) / eval_node(*n.rhs, vars);
    case Op::kPow: return std::pow(eval_node(*n.lhs, vars), eval_node(*n.rhs, vars));
    case Op::kNeg: return -eval_node(*n.lhs, vars);
    case Op::kExp: return std::exp(eval_node(*n.lhs, vars));
    case Op::kSin: return std::sin(eval_node(*n.lhs, vars));
    case Op::kCos: return std::cos(eval_node(*n.lhs, vars));
    case Op::kLog: return std::log(eval_node(*n.lhs, vars));
    case Op::kSqrt: return std::sqrt(eval_node(*n.lhs, vars));
  }
  return 0.0;
}

// Folding constructors keep derivative trees from ballooning.

NodePtr fold_add(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a->op == Op::kConst && b->op == Op::kConst) return make_const(a->value + b->value);
  return make_node(Op::kAdd, std::move(a), std::move(b));
}

NodePtr fold_sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0)) return a;
  if (a->op == Op::kConst && b->op == Op::kConst) return make_const(a->value - b->value);
  if (is_const(a, 0)) return make_node(Op::kNeg, std::move(b));
  return make_node(Op::kSub, std::move(a), std::move(b));
}

NodePtr fold_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a->op == Op::kConst && b->op == Op::kConst) return make_const(a->value * b->value);
  return make_node(Op::kMul, std::move(a), std::move(b));
}

NodePtr fold_div(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return make_const(0);
  if (is_const(b, 1)) return a;
  if (a->op == Op::kConst && b->op == Op::kConst && b->value != 0)
    return make_const(a->value / b->value);
  return make_node(Op::kDiv, std::move(a), std::move(b));
}

bool node_uses_variable(const Expr::Node& n, int var) {
  switch (n.op) {
    case Op::kConst: return false;
    case Op::kVar: return n.var == var;
    default:
      if (n.lhs && node_uses_variable(*n.lhs, var)) return true;
      if (n.rhs && node_uses_variable(*n.rhs, var)) return true;
      return false;
  }
}

NodePtr derive(const NodePtr& n, int var);

NodePtr derive_pow(const NodePtr& base, const NodePtr& expo, int var) {
  const bool base_dep = node_uses_variable(*base, var);
  const bool expo_dep = node_uses_variable(*expo, var);
  NodePtr self = make_node(Op::kPow, base, expo);
  if (!base_dep && !expo_dep) return make_const(0);
  if (!expo_dep) {
    // d(u^c) = c * u^(c-1) * u'
    NodePtr cm1 = fold_sub(expo, make_const(1));
    NodePtr p = make_node(Op::kPow, base, cm1);
    return fold_mul(fold_mul(expo, p), derive(base, var));
  }
  // General case: u^v * (v' log u + v u'/u)
  NodePtr term1 = fold_mul(derive(expo, var), make_node(Op::kLog, base));
  NodePtr term2 = fold_div(fold_mul(expo, derive(base, var)), base);
  return fold_mul(self, fold_add(term1, term2));
}

NodePtr derive(const NodePtr& n, int var) {
  switch (n->op) {
    case Op::kConst: return make_const(0);
    case Op::kVar: return make_const(n->var == var ? 1 : 0);
    case Op::kAdd: return fold_add(derive(n->lhs, var), derive(n->rhs, var));
    case Op::kSub: return fold_sub(derive(n->lhs, var), derive(n->rhs, var));
    case Op::kMul:
      return fold_add(fold_mul(derive(n->lhs, var), n->rhs),
                      fold_mul(n->lhs, derive(n->rhs, var)));
    case Op::kDiv:
      return fold_div(fold_sub(fold_mul(derive(n->lhs, var), n->rhs),
                               fold_mul(n->lhs, derive(n->rhs, var))),
                      make_node(Op::kMul, n->rhs, n->rhs));
    case Op::kPow: return derive_pow(n->lhs, n->rhs, var);
    case Op::kNeg: return fold_sub(make_const(0), derive(n->lhs, var));
    case Op::kExp: return fold_mul(make_node(Op::kExp, n->lhs), derive(n->lhs, var));
    case Op::kSin: return fold_mul(make_node(Op::kCos, n->lhs), derive(n->lhs, var));
    case Op::kCos:
      return fold_sub(make_const(0), fold_mul(make_node(Op::kSin, n->lhs), derive(n->lhs, var)));
    case Op::kLog: return fold_div(derive(n->lhs, var), n->lhs);
    case Op::kSqrt:
      return fold_div(derive(n->lhs, var),
                      fold_mul(make_const(2), make_node(Op::kSqrt, n->lhs)));
  }
  return make_const(0);
}

int precedence_of(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    case Op::kPow: return 4;
    default: return 5;
  }
}

void print_node(const Expr::Node& n, std::ostream& os, int parent_prec) {
  const int prec = precedence_of(n.op);
  const bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (n.op) {
    case Op::kConst: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << tmp.str();
      break;
    }
    case Op::kVar: os << "txyz"[n.var]; break;
    case Op::kAdd:
      print_node(*n.lhs, os, prec);
      os << " + ";
      print_node(*n.rhs, os, prec + 1);
      break;
    case Op::kSub:
      print_node(*n.lhs, os, prec);
      os << " - ";
      print_node(*n.rhs, os, prec + 1);
      break;
    case Op::kMul:
      print_node(*n.lhs, os, prec);
      os << "*";
      print_node(*n.rhs, os, prec + 1);
      break;
    case Op::kDiv:
      print_node(*n.lhs, os, prec);
      os << "/";
      print_node(*n.rhs, os, prec + 1);
      break;
    case Op::kPow:
      print_node(*n.lhs, os, prec + 1);
      os << "^";
      print_node(*n.rhs, os, prec);
      break;
    case Op::kNeg:
      os << "-";
      print_node(*n.lhs, os, prec + 1);
      break;
    case Op::kExp:
    case Op::kSin:
    case Op::kCos:
    case Op::kLog:
    case Op::kSqrt: {
      const char* name = n.op == Op::kExp    ? "exp"
                         : n.op == Op::kSin  ? "sin"
                         : n.op == Op::kCos  ? "cos"
                         : n.op == Op::kLog  ? "log"
                                             : "sqrt";
      os << name << '(';
      print_node(*n.lhs, os, 0);
      os << ')';
      break;
    }
  }
  if (parens) os << ')';
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError("expression error at position " + std::to_string(pos_) + ": " + what +
                    " in '" + text_ + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make_node(Op::kAdd, lhs, parse_term());
      else if (eat('-'))
        lhs = make_node(Op::kSub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = make_node(Op::kMul, lhs, parse_unary());
      else if (eat('/'))
        lhs = make_node(Op::kDiv, lhs, parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_node(Op::kNeg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) return make_node(Op::kPow, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (eat('(')) {
      NodePtr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    size_t end = 0;
    double v;
    try {
      v = std::stod(text_.substr(pos_), &end);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += end;
    return make_const(v);
  }

  NodePtr parse_ident() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (peek() == '(') {
      eat('(');
      NodePtr arg = parse_expr();
      if (name == "pow") {
        if (!eat(',')) fail("pow expects two arguments");
        NodePtr expo = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return make_node(Op::kPow, arg, expo);
      }
      if (!eat(')')) fail("expected ')'");
      if (name == "exp") return make_node(Op::kExp, arg);
      if (name == "sin") return make_node(Op::kSin, arg);
      if (name == "cos") return make_node(Op::kCos, arg);
      if (name == "log") return make_node(Op::kLog, arg);
      if (name == "sqrt") return make_node(Op::kSqrt, arg);
      fail("unknown function '" + name + "'");
    }
    if (name == "pi") return make_const(M_PI);
    if (name == "e") return make_const(M_E);
    if (name == "t") return make_var(0);
    if (name == "x") return make_var(1);
    if (name == "y") return make_var(2);
    if (name == "z") return make_var(3);
    fail("unknown identifier '" + name + "'");
  }

  const std::string& text_;
  size_t pos_ = 0;
};

}  // namespace

double Expr::operator()(const std::array<double, 4>& vars) const {
  if (!root_) throw ExprError("evaluating empty expression");
  return eval_node(*root_, vars);
}

Expr Expr::derivative(int var) const {
  if (!root_) throw ExprError("differentiating empty expression");
  return Expr(derive(root_, var));
}

bool Expr::uses_variable(int var) const {
  return root_ && node_uses_variable(*root_, var);
}

bool Expr::constant() const {
  if (!root_) return true;
  for (int v = 0; v < 4; ++v)
    if (node_uses_variable(*root_, v)) return false;
  return true;
}

std::string Expr::str() const {
  if (!root_) return "";
  std::ostringstream os;
  print_node(*root_, os, 0);
  return os.str();
}

Expr Expr::constant_value(double v) { return Expr(make_const(v)); }

Expr parse_expression(const std::string& text) {
  Parser p(text);
  return Expr(p.parse());
}

}  // namespace lightray
