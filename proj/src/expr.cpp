#include "tubeflow/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

#include "tubeflow/errors.hpp"

namespace tubeflow {
namespace detail {

enum class Op {
  Number,
  Time,
  State,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Abs,
  Min,
  Max,
};

struct Node {
  Op op;
  double value = 0.0;  // Number
  int index = 0;       // State, 1-based
  NodePtr a, b;
};

namespace {

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Number;
  n->value = v;
  return n;
}

NodePtr make_leaf(Op op, int index = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->index = index;
  return n;
}

NodePtr make_unary(Op op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double checked(double r) {
  // Leaves are always finite, so a non-finite result pinpoints the op that
  // overflowed or went undefined.
  if (!std::isfinite(r)) throw EvalError("non-finite value");
  return r;
}

double eval_node(const Node& n, double t, const Eigen::VectorXd& x) {
  switch (n.op) {
    case Op::Number:
      return n.value;
    case Op::Time:
      return t;
    case Op::State:
      return x(n.index - 1);
    case Op::Neg:
      return -eval_node(*n.a, t, x);
    case Op::Add:
      return checked(eval_node(*n.a, t, x) + eval_node(*n.b, t, x));
    case Op::Sub:
      return checked(eval_node(*n.a, t, x) - eval_node(*n.b, t, x));
    case Op::Mul:
      return checked(eval_node(*n.a, t, x) * eval_node(*n.b, t, x));
    case Op::Div: {
      double num = eval_node(*n.a, t, x);
      double den = eval_node(*n.b, t, x);
      if (den == 0.0) throw EvalError("division by zero");
      return checked(num / den);
    }
    case Op::Pow: {
      double base = eval_node(*n.a, t, x);
      double e = eval_node(*n.b, t, x);
      double r = std::pow(base, e);
      if (std::isnan(r)) throw EvalError("invalid power");
      return checked(r);
    }
    case Op::Sin:
      return std::sin(eval_node(*n.a, t, x));
    case Op::Cos:
      return std::cos(eval_node(*n.a, t, x));
    case Op::Exp:
      return checked(std::exp(eval_node(*n.a, t, x)));
    case Op::Sqrt: {
      double v = eval_node(*n.a, t, x);
      if (v < 0.0) throw EvalError("square root of negative value");
      return std::sqrt(v);
    }
    case Op::Abs:
      return std::fabs(eval_node(*n.a, t, x));
    case Op::Min:
      return std::fmin(eval_node(*n.a, t, x), eval_node(*n.b, t, x));
    case Op::Max:
      return std::fmax(eval_node(*n.a, t, x), eval_node(*n.b, t, x));
  }
  throw EvalError("corrupt expression node");
}

bool node_references_state(const Node& n) {
  if (n.op == Op::State) return true;
  if (n.a && node_references_state(*n.a)) return true;
  if (n.b && node_references_state(*n.b)) return true;
  return false;
}

// Binding strength used for minimal-parenthesis printing.
int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int parent_prec, bool tighten, std::string& out) {
  bool wrap = precedence(child.op) < parent_prec ||
              (tighten && precedence(child.op) == parent_prec);
  if (wrap) out += '(';
  print_node(child, out);
  if (wrap) out += ')';
}

void print_call(const char* name, const Node& n, std::string& out) {
  out += name;
  out += '(';
  print_node(*n.a, out);
  if (n.b) {
    out += ',';
    print_node(*n.b, out);
  }
  out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Number:
      out += format_number(n.value);
      return;
    case Op::Time:
      out += 't';
      return;
    case Op::State:
      out += 'x';
      out += std::to_string(n.index);
      return;
    case Op::Neg:
      out += '-';
      print_child(*n.a, precedence(Op::Neg), false, out);
      return;
    case Op::Add:
      // The right operand keeps its parens on ties so the reparsed tree has
      // the same shape and rounds identically.
      print_child(*n.a, 1, false, out);
      out += '+';
      print_child(*n.b, 1, true, out);
      return;
    case Op::Sub:
      print_child(*n.a, 1, false, out);
      out += '-';
      print_child(*n.b, 1, true, out);
      return;
    case Op::Mul:
      print_child(*n.a, 2, false, out);
      out += '*';
      print_child(*n.b, 2, true, out);
      return;
    case Op::Div:
      print_child(*n.a, 2, false, out);
      out += '/';
      print_child(*n.b, 2, true, out);
      return;
    case Op::Pow:
      // Right associative: the base wraps on ties, the exponent does not.
      print_child(*n.a, 4, true, out);
      out += '^';
      print_child(*n.b, 4, false, out);
      return;
    case Op::Sin:
      print_call("sin", n, out);
      return;
    case Op::Cos:
      print_call("cos", n, out);
      return;
    case Op::Exp:
      print_call("exp", n, out);
      return;
    case Op::Sqrt:
      print_call("sqrt", n, out);
      return;
    case Op::Abs:
      print_call("abs", n, out);
      return;
    case Op::Min:
      print_call("min", n, out);
      return;
    case Op::Max:
      print_call("max", n, out);
      return;
  }
}

NodePtr substitute_time_node(const NodePtr& n, const NodePtr& replacement) {
  switch (n->op) {
    case Op::Time:
      return replacement;
    case Op::Number:
    case Op::State:
      return n;
    default: {
      NodePtr a = n->a ? substitute_time_node(n->a, replacement) : nullptr;
      NodePtr b = n->b ? substitute_time_node(n->b, replacement) : nullptr;
      if (a == n->a && b == n->b) return n;  // untouched subtree, share it
      auto copy = std::make_shared<Node>(*n);
      copy->a = std::move(a);
      copy->b = std::move(b);
      return copy;
    }
  }
}

// ---- parsing ----

enum class TokKind { Number, Ident, Symbol, End };

struct Token {
  TokKind kind;
  std::size_t pos;
  double number = 0.0;
  std::string ident;
  char symbol = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokKind::End;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      const char* begin = src_.data() + pos_;
      const char* end = src_.data() + src_.size();
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc()) throw ParseError("malformed number", pos_);
      tok_.kind = TokKind::Number;
      tok_.number = value;
      pos_ += static_cast<std::size_t>(ptr - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = TokKind::Ident;
      tok_.ident = src_.substr(start, pos_ - start);
      return;
    }
    if (std::string("+-*/^(),").find(c) != std::string::npos) {
      tok_.kind = TokKind::Symbol;
      tok_.symbol = c;
      ++pos_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, int dim) : lex_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expression();
    if (lex_.peek().kind != TokKind::End)
      throw ParseError("trailing input after expression", lex_.peek().pos);
    return e;
  }

 private:
  bool at_symbol(char c) const {
    return lex_.peek().kind == TokKind::Symbol && lex_.peek().symbol == c;
  }

  void expect_symbol(char c, const char* what) {
    if (!at_symbol(c)) throw ParseError(std::string("expected ") + what, lex_.peek().pos);
    lex_.take();
  }

  NodePtr expression() {
    NodePtr left = term();
    while (at_symbol('+') || at_symbol('-')) {
      char op = lex_.take().symbol;
      left = make_binary(op == '+' ? Op::Add : Op::Sub, std::move(left), term());
    }
    return left;
  }

  NodePtr term() {
    NodePtr left = factor();
    while (at_symbol('*') || at_symbol('/')) {
      char op = lex_.take().symbol;
      left = make_binary(op == '*' ? Op::Mul : Op::Div, std::move(left), factor());
    }
    return left;
  }

  NodePtr factor() {
    if (at_symbol('-')) {
      lex_.take();
      return make_unary(Op::Neg, factor());
    }
    if (at_symbol('+')) {  // unary plus: accepted and dropped
      lex_.take();
      return factor();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (at_symbol('^')) {
      lex_.take();
      return make_binary(Op::Pow, std::move(base), factor());
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = lex_.peek();
    if (t.kind == TokKind::Number) return make_number(lex_.take().number);
    if (t.kind == TokKind::Ident) return ident_atom();
    if (at_symbol('(')) {
      lex_.take();
      NodePtr e = expression();
      expect_symbol(')', "')'");
      return e;
    }
    throw ParseError("expected a value", t.pos);
  }

  NodePtr ident_atom() {
    Token t = lex_.take();
    if (at_symbol('(')) return call(t);
    return variable(t);
  }

  NodePtr call(const Token& name) {
    struct Fn {
      const char* name;
      Op op;
      int arity;
    };
    static const Fn fns[] = {{"sin", Op::Sin, 1}, {"cos", Op::Cos, 1},
                             {"exp", Op::Exp, 1}, {"sqrt", Op::Sqrt, 1},
                             {"abs", Op::Abs, 1}, {"min", Op::Min, 2},
                             {"max", Op::Max, 2}};
    const Fn* fn = nullptr;
    for (const Fn& f : fns)
      if (name.ident == f.name) fn = &f;
    if (!fn) throw ParseError("unknown function '" + name.ident + "'", name.pos);
    lex_.take();  // '('
    NodePtr a = expression();
    NodePtr b;
    if (fn->arity == 2) {
      expect_symbol(',', "','");
      b = expression();
    }
    expect_symbol(')', "')'");
    return fn->arity == 2 ? make_binary(fn->op, std::move(a), std::move(b))
                          : make_unary(fn->op, std::move(a));
  }

  NodePtr variable(const Token& t) {
    const std::string& s = t.ident;
    if (s == "t") return make_leaf(Op::Time);
    if (dim_ <= 3) {
      static const char* alias = "xyz";
      for (int i = 0; i < 3; ++i) {
        if (s.size() == 1 && s[0] == alias[i]) {
          if (i >= dim_)
            throw ParseError("state variable '" + s + "' out of range", t.pos);
          return make_leaf(Op::State, i + 1);
        }
      }
    }
    if (s.size() >= 2 && s[0] == 'x' &&
        std::all_of(s.begin() + 1, s.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
      if (ec != std::errc() || ptr != s.data() + s.size() || idx < 1 || idx > dim_)
        throw ParseError("state variable '" + s + "' out of range", t.pos);
      return make_leaf(Op::State, idx);
    }
    throw ParseError("unknown identifier '" + s + "'", t.pos);
  }

  Lexer lex_;
  int dim_;
};

}  // namespace
}  // namespace detail

double Expr::eval(double t, const Eigen::VectorXd& x) const {
  if (!root_) throw EvalError("evaluating empty expression");
  return detail::eval_node(*root_, t, x);
}

bool Expr::references_state() const {
  return root_ && detail::node_references_state(*root_);
}

std::string Expr::text() const {
  std::string out;
  if (root_) detail::print_node(*root_, out);
  return out;
}

Expr Expr::substitute_time(const Expr& replacement) const {
  if (!root_) return *this;
  return Expr(detail::substitute_time_node(root_, replacement.root_),
              std::max(dim_, replacement.dim_));
}

Expr Expr::negated() const {
  return Expr(detail::make_unary(detail::Op::Neg, root_), dim_);
}

Expr parse_expr(const std::string& source, int dimension) {
  if (dimension < 0) throw std::invalid_argument("parse_expr: negative dimension");
  detail::Parser p(source, dimension);
  return Expr(p.parse(), dimension);
}

Expr ExprBuilder::constant(double v) const { return Expr(detail::make_number(v), dim_); }

Expr ExprBuilder::time() const { return Expr(detail::make_leaf(detail::Op::Time), dim_); }

Expr ExprBuilder::state(int index_one_based) const {
  if (index_one_based < 1 || index_one_based > dim_)
    throw std::invalid_argument("ExprBuilder::state: index out of range");
  return Expr(detail::make_leaf(detail::Op::State, index_one_based), dim_);
}

Expr ExprBuilder::sub(const Expr& a, const Expr& b) const {
  return Expr(detail::make_binary(detail::Op::Sub, a.root_, b.root_), dim_);
}

VectorExpr::VectorExpr(std::vector<Expr> components) : components_(std::move(components)) {}

Eigen::VectorXd VectorExpr::eval(double t, const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(dimension());
  eval_into(t, x, out);
  return out;
}

void VectorExpr::eval_into(double t, const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.resize(dimension());
  for (int i = 0; i < dimension(); ++i) out(i) = components_[i].eval(t, x);
}

std::vector<std::string> VectorExpr::text() const {
  std::vector<std::string> out;
  out.reserve(components_.size());
  for (const Expr& e : components_) out.push_back(e.text());
  return out;
}

VectorExpr VectorExpr::substitute_time(const Expr& replacement) const {
  std::vector<Expr> comps;
  comps.reserve(components_.size());
  for (const Expr& e : components_) comps.push_back(e.substitute_time(replacement));
  return VectorExpr(std::move(comps));
}

VectorExpr VectorExpr::negated() const {
  std::vector<Expr> comps;
  comps.reserve(components_.size());
  for (const Expr& e : components_) comps.push_back(e.negated());
  return VectorExpr(std::move(comps));
}

VectorExpr parse_vector_expr(const std::vector<std::string>& sources) {
  int n = static_cast<int>(sources.size());
  if (n == 0) throw ParseError("no components", 0);
  std::vector<Expr> comps;
  comps.reserve(sources.size());
  for (const std::string& s : sources) comps.push_back(parse_expr(s, n));
  return VectorExpr(std::move(comps));
}

}  // namespace tubeflow
