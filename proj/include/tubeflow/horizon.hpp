#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tubeflow/integrate.hpp"
#include "tubeflow/relaxation.hpp"
#include "tubeflow/rng.hpp"
#include "tubeflow/setvalued.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// Partition 0 = T_0 < ... < T_K with the sampled minimum of the radius over
// each interval.  radii[j] = min r over [times[j], times[j+1]] serves two
// roles: the tube radius available inside segment j+1, and the cap on the
// entry ball placed at T_j.
struct SegmentPlan {
  std::vector<double> times;
  std::vector<double> radii;

  int segments() const { return static_cast<int>(times.size()) - 1; }
  double segment_radius(int k) const { return radii[k - 1]; }  // k in 1..K
  double entry_cap(int k) const { return radii[k]; }           // k in 0..K-1
  void validate() const;
};

// Uniform segmentation T_k = k * width clipped to the horizon; interval
// minima estimated on samples_per_segment points (endpoints included).
// Throws if the radius is not strictly positive at every sample.
SegmentPlan plan_segments(const Radius& r, double horizon, double width,
                          int samples_per_segment = 1000);

// One segment of the backward pass: the inclusion run in reversed time on
// [0, T_k - T_{k-1}], its reversed reference and control, and the selection
// family produced by tube_selection with radius epsilon (the family delta
// additionally capped by the plan's entry cap at T_k).
struct BackwardSegment {
  int k = 0;                // forward segment index, 1-based
  double t_begin = 0.0;     // forward interval [T_{k-1}, T_k]
  double t_end = 0.0;
  double epsilon = 0.0;
  double cap = 0.0;         // plan cap applied to delta (inf for k = K)
  PolytopicField field;     // reversed field on [0, t_end - t_begin]
  Trajectory reference;     // z(T_k - s)
  RelaxedControl control;   // reversed weights
  SelectionFamily family;
};

BackwardSegment backward_segment(const PolytopicField& field, const Trajectory& z,
                                 const RelaxedControl& lam, int k, const SegmentPlan& plan,
                                 double epsilon, double step, Rng& rng,
                                 const TubeSelectionOptions& opt = {});

struct SegmentReport {
  int k = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;        // family ball radius after caps and halvings
  double cap = 0.0;
  long slices = 0;
  double chatter_gap = 0.0;
  double achieved_gap = 0.0;  // sup gap of the anchored member vs reference
  double anchor_gap = 0.0;    // |eta^{k-1} - z(T_{k-1})|
  bool anchor_in_ball = false;
  int halvings = 0;
};

struct HorizonResult {
  Eigen::VectorXd eta0;
  Trajectory trajectory;  // glued forward trajectory on [T_0, T_K]
  std::vector<SegmentReport> segments;  // forward order, k = 1..K
  double initial_gap = 0.0;             // |eta0 - z(T_0)|
  double worst_gap = 0.0;               // max |z(t) - x(t)| over the glued grid
  double worst_gap_time = 0.0;
  double worst_gap_ratio = 0.0;         // max gap / r(t)
  double tolerance = 0.0;               // tube-check slack used
};

// Backward recursion from the anchor z(T_K): each segment's family maps the
// running anchor to the next one; the reversed members are glued into a
// forward trajectory sharing seam states exactly.  Verifies the time-sliced
// tube bound |z(t) - x(t)| <= r(t) + tolerance on the glued grid and throws
// ApproximationError with the worst (t, gap) on violation.
HorizonResult horizon_approximate(const PolytopicField& field, const Trajectory& z,
                                  const RelaxedControl& lam, const Radius& r,
                                  const SegmentPlan& plan, double step, Rng& rng,
                                  const TubeSelectionOptions& opt = {});

struct CompletenessEntry {
  Eigen::VectorXd start;
  std::vector<EscapeReport> switching;  // per trial, paths dropped
  std::vector<EscapeReport> relaxed;
  bool switching_escaped = false;
  bool relaxed_escaped = false;
  bool disagreement = false;
};

struct CompletenessReport {
  std::vector<CompletenessEntry> entries;
  bool any_disagreement = false;
  int trials = 0;
  double t_max = 0.0;
  double threshold = 0.0;
  int segments = 0;
};

// Samples both inclusions from each start with `trials` random controls per
// column and reports declared escapes.  A column disagreement is evidence
// against completeness transfer, not a proof.  Trials run on `jobs` threads;
// every trial derives its own substream from the base seed, so the output
// does not depend on the schedule.
CompletenessReport completeness_probe(const PolytopicField& field,
                                      const std::vector<Eigen::VectorXd>& starts,
                                      double t_max, int trials, double step,
                                      double threshold, const Rng& base,
                                      int probe_segments = 400, int jobs = 1);

}  // namespace tubeflow
