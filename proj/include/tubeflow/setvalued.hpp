#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "tubeflow/expr.hpp"
#include "tubeflow/rng.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// Set-valued right-hand side F(t, x) = co{f_1(t,x), ..., f_m(t,x)} described
// by its vertex fields.  eval_set returns the vertex values only; convex
// combinations are taken where they are needed (relaxed integration).
struct PolytopicField {
  int dimension = 0;
  std::vector<VectorExpr> vertices;
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  void validate() const;
  void check_time(double t) const;
};

// Vertex values at (t, x), in vertex order.
std::vector<Eigen::VectorXd> eval_set(const PolytopicField& field, double t,
                                      const Eigen::VectorXd& x);

// Hausdorff distance between finite nonempty point sets.
double hausdorff_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b);

// Distance from p to the segment [a, b].
double point_segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b);

// Tube radius: a constant or an expression in t alone.
class Radius {
 public:
  Radius() = default;
  static Radius constant(double value);
  static Radius function_of_time(Expr expr);

  double at(double t) const;
  bool is_constant() const { return !has_expr_; }
  const Expr& expr() const;
  std::string text() const;

  // Sampled minimum over [a, b] including both endpoints.
  double min_over(double a, double b, int samples = 1024) const;

 private:
  double value_ = 0.0;
  bool has_expr_ = false;
  Expr expr_;
};

// Neighborhood of a reference curve: center z(.) with radius r(t).
struct Tube {
  Trajectory center;
  Radius radius;

  // |x - z(t)| <= r(t), with t interpreted on the center's grid.
  bool contains(double t, const Eigen::VectorXd& x) const;
};

// Spatial distance from x to the centerline polyline (time-free: the
// centerline is treated as a curve in state space).
double tube_distance(const Tube& tube, const Eigen::VectorXd& x);

// Field damped to zero away from a tube: vertices Phi(x) * f_i(t, x) with
// Phi(x) = max(1 - tube_distance(x), 0).  Where Phi vanishes the value is
// the zero set exactly and the underlying field is not evaluated, so the
// truncation is total even where F is not.
class TruncatedField {
 public:
  TruncatedField(PolytopicField field, Tube tube);

  double scale(const Eigen::VectorXd& x) const;
  std::vector<Eigen::VectorXd> eval(double t, const Eigen::VectorXd& x) const;

  const PolytopicField& field() const { return field_; }
  const Tube& tube() const { return tube_; }

 private:
  PolytopicField field_;
  Tube tube_;
};

TruncatedField truncate_field(const PolytopicField& field, const Tube& tube);

// Sampled bounds for F over [t0, t1] x B(center, radius): sup of vertex
// norms and a Hausdorff difference-quotient Lipschitz estimate.  Sampled
// suprema, so both are lower bounds that grow monotonically with `samples`
// for a fixed rng seed (the sample stream is a prefix).  `residual` is
// |x0| + value_bound for the anchor x0 = center.  Analytic overrides can be
// assembled directly from these fields.
struct BoundsEstimate {
  double ball_radius = 0.0;
  double lipschitz = 0.0;
  double value_bound = 0.0;
  double residual = 0.0;
  int sample_count = 0;
};

BoundsEstimate estimate_bounds(const PolytopicField& field, const Eigen::VectorXd& center,
                               double radius, double t0, double t1, int samples, Rng& rng);

// Time-reversed field on [0, t_hi - t_lo]: vertices -f_i(t_hi - t, x).
// Used to run a segment backwards from its endpoint.
PolytopicField reverse_field(const PolytopicField& field, double t_lo, double t_hi);

}  // namespace tubeflow
