#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tubeflow/integrate.hpp"
#include "tubeflow/rng.hpp"
#include "tubeflow/setvalued.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// Time-sliced realization of a relaxed control: the working interval is cut
// into `slice_count` equal slices; inside slice j each vertex gets a
// contiguous share of the slice proportional to the weight row sampled at
// the slice midpoint, played in `order`.
struct ChatterPlan {
  double t_begin = 0.0;
  double t_end = 0.0;
  int slice_count = 0;
  std::vector<int> order;                      // 1-based vertex visit order
  std::vector<std::vector<double>> durations;  // [slice][order position]

  double slice_width() const { return (t_end - t_begin) / slice_count; }
  double slice_boundary(int j) const;  // j in 0..slice_count
};

ChatterPlan make_chatter_plan(const RelaxedControl& lam, int slices,
                              std::vector<int> order = {});

// Switching signal realizing the plan; zero-duration pieces are dropped and
// adjacent equal-vertex pieces merged, and each slice is covered exactly.
SwitchingSignal flatten_plan(const ChatterPlan& plan);

SwitchingSignal chatter_control(const RelaxedControl& lam, int slices,
                                std::vector<int> order = {});

struct ChatterApprox {
  SwitchingSignal control;
  Trajectory trajectory;
  long slices = 0;
  double gap = 0.0;  // sup gap against the reference
};

// Switching trajectory from z's own start that tracks z within epsilon:
// doubles the slice count from 1 until the sup gap is at most
// epsilon - integration_tolerance(step, span).  Throws ApproximationError
// once max_slices is passed (epsilon below the resolvable floor for this
// step size).
ChatterApprox chatter_approximate(const PolytopicField& field, const Trajectory& z,
                                  const RelaxedControl& lam, double epsilon, double step,
                                  long max_slices = 1L << 20);

// epsilon / (4 * exp(k_integral)): the radius of the initial-condition ball
// an epsilon-tube guarantee propagates to.
double entry_ball_radius(double epsilon, double k_integral);

// Trajectories from a ball of initial conditions that all track a reference
// within epsilon, realized by one shared switching control.
struct SelectionFamily {
  Eigen::VectorXd center;   // reference start
  double delta = 0.0;       // verified ball radius
  SwitchingSignal control;  // shared base control
  double t_begin = 0.0;
  double t_end = 0.0;

  Trajectory base;          // trajectory from center under control
  double epsilon = 0.0;     // tube radius guaranteed around the reference
  double k_integral = 0.0;  // Gronwall exponent used for delta
  double chatter_gap = 0.0;
  long slices = 0;
  int halvings = 0;         // delta halvings spent in verification
  BoundsEstimate bounds;    // bounds used (estimated or supplied)

  // Family member: the shared control integrated from eta.
  Trajectory member(const PolytopicField& field, const Eigen::VectorXd& eta,
                    double step) const;
};

struct TubeSelectionOptions {
  std::optional<BoundsEstimate> bounds;  // analytic override; else estimated
  int bound_samples = 4000;
  long max_slices = 1L << 20;
  int probe_count = 4;  // random verification probes beside the axis ones
  int max_halvings = 10;
};

// The finite-interval tube pipeline: bounds on the unit-inflated tube give
// the damped-field Lipschitz constant k = value_bound + lipschitz, the
// chattering approximation tracks z within epsilon/2, and the entry ball
// radius entry_ball_radius(epsilon, k * span) is verified by integrating
// probe starts and checking the epsilon bound, halving delta on failure.
SelectionFamily tube_selection(const PolytopicField& field, const Trajectory& z,
                               const RelaxedControl& lam, double epsilon, double step,
                               Rng& rng, const TubeSelectionOptions& opt = {});

}  // namespace tubeflow
