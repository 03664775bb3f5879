#include "tubeflow/setvalued.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tubeflow/errors.hpp"

namespace tubeflow {

void PolytopicField::validate() const {
  if (dimension < 1) throw std::invalid_argument("PolytopicField: dimension must be >= 1");
  if (vertices.empty()) throw std::invalid_argument("PolytopicField: no vertices");
  for (const VectorExpr& v : vertices)
    if (v.dimension() != dimension)
      throw std::invalid_argument("PolytopicField: vertex dimension mismatch");
  if (!(t_min < t_max))
    throw std::invalid_argument("PolytopicField: empty time domain");
}

void PolytopicField::check_time(double t) const {
  double slack = 1e-9 * std::max(1.0, std::fabs(t_max) == HUGE_VAL ? 1.0 : std::fabs(t_max));
  if (t < t_min - slack || t > t_max + slack)
    throw std::out_of_range("PolytopicField: time " + std::to_string(t) +
                            " outside field domain");
}

std::vector<Eigen::VectorXd> eval_set(const PolytopicField& field, double t,
                                      const Eigen::VectorXd& x) {
  field.check_time(t);
  if (x.size() != field.dimension)
    throw std::invalid_argument("eval_set: state dimension mismatch");
  std::vector<Eigen::VectorXd> out;
  out.reserve(field.vertices.size());
  for (const VectorExpr& v : field.vertices) out.push_back(v.eval(t, x));
  return out;
}

double hausdorff_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("hausdorff_distance: empty set");
  double worst = 0.0;
  auto one_sided = [&](const std::vector<Eigen::VectorXd>& from,
                       const std::vector<Eigen::VectorXd>& to) {
    for (const Eigen::VectorXd& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Eigen::VectorXd& q : to) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
  };
  one_sided(a, b);
  one_sided(b, a);
  return worst;
}

double point_segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd d = b - a;
  double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  double s = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

Radius Radius::constant(double value) {
  if (!(value >= 0.0)) throw std::invalid_argument("Radius: negative constant");
  Radius r;
  r.value_ = value;
  return r;
}

Radius Radius::function_of_time(Expr expr) {
  if (expr.empty()) throw std::invalid_argument("Radius: empty expression");
  if (expr.references_state())
    throw std::invalid_argument("Radius: expression may only depend on t");
  Radius r;
  r.has_expr_ = true;
  r.expr_ = std::move(expr);
  return r;
}

double Radius::at(double t) const {
  if (!has_expr_) return value_;
  double v = expr_.eval(t, Eigen::VectorXd());
  if (!(v >= 0.0)) throw EvalError("Radius: negative value at t=" + std::to_string(t));
  return v;
}

const Expr& Radius::expr() const {
  if (!has_expr_) throw std::logic_error("Radius: constant has no expression");
  return expr_;
}

std::string Radius::text() const {
  if (has_expr_) return expr_.text();
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value_);
  return buf;
}

double Radius::min_over(double a, double b, int samples) const {
  if (!(a <= b)) throw std::invalid_argument("Radius::min_over: bad interval");
  if (!has_expr_) return value_;
  if (samples < 2) samples = 2;
  double lo = at(a);
  for (int i = 1; i < samples; ++i) {
    double t = a + (b - a) * i / (samples - 1);
    lo = std::min(lo, at(t));
  }
  return lo;
}

bool Tube::contains(double t, const Eigen::VectorXd& x) const {
  return (x - center.at(t)).norm() <= radius.at(t);
}

double tube_distance(const Tube& tube, const Eigen::VectorXd& x) {
  const auto& pts = tube.center.states();
  if (x.size() != pts[0].size())
    throw std::invalid_argument("tube_distance: state dimension mismatch");
  if (pts.size() == 1) return (x - pts[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    best = std::min(best, point_segment_distance(x, pts[i], pts[i + 1]));
  return best;
}

TruncatedField::TruncatedField(PolytopicField field, Tube tube)
    : field_(std::move(field)), tube_(std::move(tube)) {
  field_.validate();
  if (tube_.center.dimension() != field_.dimension)
    throw std::invalid_argument("TruncatedField: tube dimension mismatch");
}

double TruncatedField::scale(const Eigen::VectorXd& x) const {
  return std::max(1.0 - tube_distance(tube_, x), 0.0);
}

std::vector<Eigen::VectorXd> TruncatedField::eval(double t, const Eigen::VectorXd& x) const {
  double phi = scale(x);
  if (phi == 0.0) {
    // Exactly {0}; never touches the wrapped field.
    return std::vector<Eigen::VectorXd>(field_.vertices.size(),
                                        Eigen::VectorXd::Zero(field_.dimension));
  }
  std::vector<Eigen::VectorXd> vals = eval_set(field_, t, x);
  if (phi != 1.0)
    for (Eigen::VectorXd& v : vals) v *= phi;
  return vals;
}

TruncatedField truncate_field(const PolytopicField& field, const Tube& tube) {
  return TruncatedField(field, tube);
}

BoundsEstimate estimate_bounds(const PolytopicField& field, const Eigen::VectorXd& center,
                               double radius, double t0, double t1, int samples, Rng& rng) {
  field.validate();
  if (!(t0 <= t1)) throw std::invalid_argument("estimate_bounds: bad time interval");
  if (!(radius > 0.0)) throw std::invalid_argument("estimate_bounds: radius must be positive");
  if (samples < 2) throw std::invalid_argument("estimate_bounds: need at least 2 samples");

  BoundsEstimate est;
  est.ball_radius = radius;
  est.sample_count = samples;
  for (int i = 0; i < samples; ++i) {
    // First two iterations pin the interval endpoints so short streams
    // still see the whole time span.
    double t = i == 0 ? t0 : (i == 1 ? t1 : rng.uniform(t0, t1));
    Eigen::VectorXd x = center + rng.in_ball(field.dimension, radius);
    Eigen::VectorXd y = center + rng.in_ball(field.dimension, radius);
    std::vector<Eigen::VectorXd> fx = eval_set(field, t, x);
    std::vector<Eigen::VectorXd> fy = eval_set(field, t, y);
    for (const Eigen::VectorXd& v : fx) est.value_bound = std::max(est.value_bound, v.norm());
    for (const Eigen::VectorXd& v : fy) est.value_bound = std::max(est.value_bound, v.norm());
    double gap = (x - y).norm();
    if (gap > 1e-12)
      est.lipschitz = std::max(est.lipschitz, hausdorff_distance(fx, fy) / gap);
  }
  est.residual = center.norm() + est.value_bound;
  return est;
}

PolytopicField reverse_field(const PolytopicField& field, double t_lo, double t_hi) {
  field.validate();
  if (!(t_lo < t_hi)) throw std::invalid_argument("reverse_field: empty interval");
  if (t_lo < field.t_min - 1e-9 || t_hi > field.t_max + 1e-9)
    throw std::invalid_argument("reverse_field: interval outside field domain");

  ExprBuilder builder(field.dimension);
  Expr flipped = builder.sub(builder.constant(t_hi), builder.time());

  PolytopicField out;
  out.dimension = field.dimension;
  out.t_min = 0.0;
  out.t_max = t_hi - t_lo;
  out.vertices.reserve(field.vertices.size());
  for (const VectorExpr& v : field.vertices)
    out.vertices.push_back(v.substitute_time(flipped).negated());
  return out;
}

}  // namespace tubeflow
