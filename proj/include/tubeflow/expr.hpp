#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace tubeflow {

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
}  // namespace detail

// Immutable scalar expression in the time variable `t` and state variables
// `x1..xn`.  Built by parse_expr(); evaluation is reentrant and thread-safe.
//
// Grammar (see docs/expression-grammar.md for the full version):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          right associative
//   atom   := number | variable | call | '(' expr ')'
//   call   := ('sin'|'cos'|'exp'|'sqrt'|'abs') '(' expr ')'
//           | ('min'|'max') '(' expr ',' expr ')'
//
// Variables: 't', 'x1'..'xn'; for n <= 3 the aliases x, y, z name x1, x2, x3.
class Expr {
 public:
  Expr() = default;

  double eval(double t, const Eigen::VectorXd& x) const;

  // Dimension the expression was parsed against (state slots available,
  // not necessarily referenced).
  int dimension() const { return dim_; }

  // True if any state variable occurs in the tree.
  bool references_state() const;

  // Canonical form: x1..xn variable names, minimal parentheses, '%.17g'
  // numeric literals.  parse_expr(text(), dimension()) rebuilds an
  // expression that evaluates bit-identically.
  std::string text() const;

  // Expression with every occurrence of `t` replaced by `replacement`
  // (which may itself mention `t`).  Subtrees without `t` are shared.
  Expr substitute_time(const Expr& replacement) const;

  // The expression -(*this).
  Expr negated() const;

  bool empty() const { return root_ == nullptr; }

 private:
  friend Expr parse_expr(const std::string&, int);
  friend class ExprBuilder;
  Expr(detail::NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  detail::NodePtr root_;
  int dim_ = 0;
};

// Parses `source` against state dimension `dimension` (>= 0; dimension 0
// admits only `t`).  Throws ParseError with a byte offset on bad input.
Expr parse_expr(const std::string& source, int dimension);

// Constructors for programmatic expression assembly.
class ExprBuilder {
 public:
  explicit ExprBuilder(int dimension) : dim_(dimension) {}
  Expr constant(double v) const;
  Expr time() const;
  Expr state(int index_one_based) const;  // x<k>
  Expr sub(const Expr& a, const Expr& b) const;

 private:
  int dim_;
};

// One vector field component per state coordinate.
class VectorExpr {
 public:
  VectorExpr() = default;
  VectorExpr(std::vector<Expr> components);

  int dimension() const { return static_cast<int>(components_.size()); }
  const Expr& component(int i) const { return components_[i]; }

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const;
  void eval_into(double t, const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

  std::vector<std::string> text() const;
  VectorExpr substitute_time(const Expr& replacement) const;
  VectorExpr negated() const;

 private:
  std::vector<Expr> components_;
};

// Parses an n-component field from per-component sources.  Every component
// is parsed against dimension n = sources.size().
VectorExpr parse_vector_expr(const std::vector<std::string>& sources);

}  // namespace tubeflow
