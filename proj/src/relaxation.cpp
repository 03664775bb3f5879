#include "tubeflow/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tubeflow/errors.hpp"

namespace tubeflow {

double ChatterPlan::slice_boundary(int j) const {
  if (j <= 0) return t_begin;
  if (j >= slice_count) return t_end;
  return t_begin + (t_end - t_begin) * j / slice_count;
}

ChatterPlan make_chatter_plan(const RelaxedControl& lam, int slices, std::vector<int> order) {
  lam.validate();
  if (slices < 1) throw std::invalid_argument("make_chatter_plan: slices must be >= 1");
  int m = lam.vertex_count();
  if (order.empty()) {
    order.resize(m);
    std::iota(order.begin(), order.end(), 1);
  } else {
    std::vector<int> seen = order;
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < m; ++i)
      if (seen[static_cast<std::size_t>(i)] != i + 1)
        throw std::invalid_argument("make_chatter_plan: order is not a permutation of 1..m");
  }

  ChatterPlan plan;
  plan.t_begin = lam.t_begin();
  plan.t_end = lam.t_end();
  plan.slice_count = slices;
  plan.order = std::move(order);
  plan.durations.reserve(slices);
  for (int j = 0; j < slices; ++j) {
    double a = plan.slice_boundary(j), b = plan.slice_boundary(j + 1);
    const std::vector<double>& w = lam.weights_at(0.5 * (a + b));
    std::vector<double> dur(m);
    for (int i = 0; i < m; ++i) dur[i] = (b - a) * std::max(w[plan.order[i] - 1], 0.0);
    plan.durations.push_back(std::move(dur));
  }
  return plan;
}

SwitchingSignal flatten_plan(const ChatterPlan& plan) {
  SwitchingSignal u;
  auto emit = [&u](double from, double to, int vertex) {
    if (!(to > from)) return;
    if (!u.indices.empty() && u.indices.back() == vertex) {
      u.breakpoints.back() = to;
      return;
    }
    if (u.breakpoints.empty()) u.breakpoints.push_back(from);
    u.breakpoints.push_back(to);
    u.indices.push_back(vertex);
  };

  int m = static_cast<int>(plan.order.size());
  for (int j = 0; j < plan.slice_count; ++j) {
    double a = plan.slice_boundary(j), b = plan.slice_boundary(j + 1);
    const std::vector<double>& dur = plan.durations[j];
    int last = -1;
    for (int i = 0; i < m; ++i)
      if (dur[i] > 0.0) last = i;
    if (last < 0)
      throw std::invalid_argument("flatten_plan: slice with no positive duration");
    double cur = a;
    for (int i = 0; i <= last; ++i) {
      if (dur[i] <= 0.0 && i != last) continue;
      // The last active piece absorbs rounding so the slice ends exactly at b.
      double end = i == last ? b : std::min(cur + dur[i], b);
      emit(cur, end, plan.order[i]);
      cur = std::max(cur, end);
    }
  }
  if (u.breakpoints.empty())
    throw std::invalid_argument("flatten_plan: empty plan");
  return u;
}

SwitchingSignal chatter_control(const RelaxedControl& lam, int slices, std::vector<int> order) {
  return flatten_plan(make_chatter_plan(lam, slices, std::move(order)));
}

ChatterApprox chatter_approximate(const PolytopicField& field, const Trajectory& z,
                                  const RelaxedControl& lam, double epsilon, double step,
                                  long max_slices) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("chatter_approximate: epsilon must be > 0");
  double span = z.t_end() - z.t_begin();
  double target = epsilon - integration_tolerance(step, span);
  if (!(target > 0.0))
    throw ApproximationError("chatter_approximate: epsilon is below the integration noise "
                             "floor for this step size");

  for (long n = 1; n <= max_slices; n *= 2) {
    SwitchingSignal u = chatter_control(lam, static_cast<int>(n));
    Trajectory y = integrate_switching(field, u, z.states().front(), step);
    double gap = sup_gap(z, y);
    if (gap <= target) {
      ChatterApprox out;
      out.control = std::move(u);
      out.trajectory = std::move(y);
      out.slices = n;
      out.gap = gap;
      return out;
    }
  }
  throw ApproximationError("chatter_approximate: slice budget (" + std::to_string(max_slices) +
                           ") exhausted before reaching epsilon = " + std::to_string(epsilon));
}

double entry_ball_radius(double epsilon, double k_integral) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("entry_ball_radius: epsilon must be > 0");
  if (k_integral < 0.0) throw std::invalid_argument("entry_ball_radius: negative exponent");
  return epsilon / (4.0 * std::exp(k_integral));
}

Trajectory SelectionFamily::member(const PolytopicField& field, const Eigen::VectorXd& eta,
                                   double step) const {
  return reuse_control(field, base, control, eta, step);
}

SelectionFamily tube_selection(const PolytopicField& field, const Trajectory& z,
                               const RelaxedControl& lam, double epsilon, double step,
                               Rng& rng, const TubeSelectionOptions& opt) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("tube_selection: epsilon must be > 0");
  field.validate();
  double span = z.t_end() - z.t_begin();

  // Bounds on a ball covering the unit-inflated epsilon-tube around z; they
  // control the damped field's Lipschitz constant k = alpha + k0.
  BoundsEstimate bounds;
  if (opt.bounds) {
    bounds = *opt.bounds;
  } else {
    double ball = z.max_norm() + epsilon + 1.0;
    bounds = estimate_bounds(field, Eigen::VectorXd::Zero(field.dimension), ball, z.t_begin(),
                             z.t_end(), opt.bound_samples, rng);
  }
  double k_integral = (bounds.value_bound + bounds.lipschitz) * span;

  ChatterApprox base = chatter_approximate(field, z, lam, 0.5 * epsilon, step, opt.max_slices);

  SelectionFamily family;
  family.center = z.states().front();
  family.delta = entry_ball_radius(epsilon, k_integral);
  family.control = base.control;
  family.t_begin = z.t_begin();
  family.t_end = z.t_end();
  family.base = base.trajectory;
  family.epsilon = epsilon;
  family.k_integral = k_integral;
  family.chatter_gap = base.gap;
  family.slices = base.slices;
  family.bounds = bounds;

  // Verify the ball: probe starts on the axes of the delta-sphere plus a few
  // random interior points must track z within epsilon.  Estimated (lower
  // bound) Lipschitz constants can make delta optimistic; halve until the
  // probes pass.
  const double tol = integration_tolerance(step, span);
  const int dim = field.dimension;
  for (int attempt = 0;; ++attempt) {
    bool ok = true;
    for (int probe = 0; probe < 2 * dim + opt.probe_count && ok; ++probe) {
      Eigen::VectorXd eta = family.center;
      if (probe < 2 * dim) {
        int axis = probe / 2;
        eta(axis) += (probe % 2 ? -family.delta : family.delta);
      } else {
        eta += rng.in_ball(dim, family.delta);
      }
      Trajectory x = family.member(field, eta, step);
      if (sup_gap(z, x) > epsilon + tol) ok = false;
    }
    if (ok) break;
    if (attempt >= opt.max_halvings)
      throw ApproximationError("tube_selection: entry ball could not be verified after " +
                               std::to_string(opt.max_halvings) + " halvings");
    family.delta *= 0.5;
    family.halvings = attempt + 1;
  }
  return family;
}

}  // namespace tubeflow
