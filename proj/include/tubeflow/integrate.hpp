#pragma once

#include <Eigen/Dense>
#include <optional>

#include "tubeflow/rng.hpp"
#include "tubeflow/setvalued.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// Error budget granted to a fixed-step RK4 run: 100 * h^4 per unit time.
// Theoretical bounds asserted numerically get this much slack.
inline double integration_tolerance(double h, double span) {
  return 100.0 * h * h * h * h * span;
}

// Solution of the vertex-selected inclusion: dx/dt = f_{u(t)}(t, x) on the
// control's span.  Fixed-step RK4; every control breakpoint is a grid point
// and steps never straddle one, so each RK4 step sees a smooth RHS.
Trajectory integrate_switching(const PolytopicField& field, const SwitchingSignal& u,
                               const Eigen::VectorXd& x0, double step);

// Solution of the relaxed inclusion: dx/dt = sum_i lambda_i(t) f_i(t, x).
// Degenerate weight rows (a single 1) evaluate exactly one vertex, so the
// result is bit-identical to integrate_switching on the same grid.
Trajectory integrate_relaxed(const PolytopicField& field, const RelaxedControl& lam,
                             const Eigen::VectorXd& x0, double step);

// |a(t0) - b(t0)| plus the discrete total variation of a - b over the
// common refined grid.  Spans must agree.
double ac_distance(const Trajectory& a, const Trajectory& b);

// max_t |a(t) - b(t)| over the union of the two grids; optionally reports
// the maximizing time.
double sup_gap(const Trajectory& a, const Trajectory& b, double* arg_t = nullptr);

// (eps0 + initial_gap) * exp(k_integral).
double gronwall_bound(double eps0, double initial_gap, double k_integral);

// Integrates the reference's own control from a perturbed start.  The
// result tracks the reference within gronwall_bound(tol, |gap(0)|, k t)
// where k is a Lipschitz bound for the field on a ball containing both
// curves.  If `region` is supplied, both curves are required to stay inside
// its ball (|x| <= ball_radius); a violation throws, and the caller should
// enlarge the region.
Trajectory reuse_control(const PolytopicField& field, const Trajectory& reference,
                         const SwitchingSignal& u_ref, const Eigen::VectorXd& eta,
                         double step, const BoundsEstimate* region = nullptr);

// Declared finite-time escape: the state norm crossed `threshold` before
// t_max.  A numerical heuristic, not a maximality proof.
struct EscapeReport {
  bool escaped = false;
  std::optional<double> escape_time;
  double threshold = 0.0;
  double final_norm = 0.0;
  Trajectory path;  // truncated at the first threshold crossing
};

EscapeReport detect_escape(const PolytopicField& field, const SwitchingSignal& u,
                           const Eigen::VectorXd& x0, double t_max, double step,
                           double threshold);
EscapeReport detect_escape(const PolytopicField& field, const RelaxedControl& lam,
                           const Eigen::VectorXd& x0, double t_max, double step,
                           double threshold);

// Random piecewise-constant controls on a uniform partition, for sampling
// the two inclusions in the completeness probe.
SwitchingSignal random_switching_signal(int vertex_count, double t0, double t1,
                                        int segments, Rng& rng);
RelaxedControl random_relaxed_control(int vertex_count, double t0, double t1,
                                      int segments, Rng& rng);

}  // namespace tubeflow
