#include "tubeflow/horizon.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "tubeflow/errors.hpp"

namespace tubeflow {

void SegmentPlan::validate() const {
  if (times.size() < 2 || radii.size() + 1 != times.size())
    throw std::invalid_argument("SegmentPlan: times/radii size mismatch");
  if (times.front() != 0.0)
    throw std::invalid_argument("SegmentPlan: segmentation must start at 0");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("SegmentPlan: times not increasing");
  for (double r : radii)
    if (!(r > 0.0)) throw std::invalid_argument("SegmentPlan: nonpositive radius");
}

SegmentPlan plan_segments(const Radius& r, double horizon, double width,
                          int samples_per_segment) {
  if (!(horizon > 0.0)) throw std::invalid_argument("plan_segments: horizon must be > 0");
  if (!(width > 0.0)) throw std::invalid_argument("plan_segments: width must be > 0");
  if (samples_per_segment < 2) samples_per_segment = 2;

  SegmentPlan plan;
  plan.times.push_back(0.0);
  for (int k = 1; width * k < horizon - 1e-12 * std::max(1.0, horizon); ++k)
    plan.times.push_back(width * k);
  plan.times.push_back(horizon);

  for (std::size_t j = 0; j + 1 < plan.times.size(); ++j) {
    double lo = r.min_over(plan.times[j], plan.times[j + 1], samples_per_segment);
    if (!(lo > 0.0))
      throw std::invalid_argument("plan_segments: radius not strictly positive on [" +
                                  std::to_string(plan.times[j]) + ", " +
                                  std::to_string(plan.times[j + 1]) + "]");
    plan.radii.push_back(lo);
  }
  plan.validate();
  return plan;
}

namespace {

// z restricted to [a, b] and reversed: w(s) = z(b - s) on [0, b - a], with
// both endpoints placed exactly.
Trajectory reverse_trajectory_slice(const Trajectory& z, double a, double b) {
  std::vector<double> fwd;
  fwd.push_back(a);
  for (double t : z.times())
    if (t > a && t < b) fwd.push_back(t);
  fwd.push_back(b);

  double span = b - a;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  times.reserve(fwd.size());
  states.reserve(fwd.size());
  for (std::size_t i = fwd.size(); i-- > 0;) {
    double s = i == 0 ? span : (i + 1 == fwd.size() ? 0.0 : b - fwd[i]);
    times.push_back(s);
    states.push_back(z.at(fwd[i]));
  }
  return Trajectory(std::move(times), std::move(states));
}

RelaxedControl reverse_control_slice(const RelaxedControl& lam, double a, double b) {
  std::vector<double> fwd;
  fwd.push_back(a);
  for (double t : lam.breakpoints)
    if (t > a && t < b) fwd.push_back(t);
  fwd.push_back(b);

  double span = b - a;
  RelaxedControl out;
  out.breakpoints.reserve(fwd.size());
  for (std::size_t i = fwd.size(); i-- > 0;)
    out.breakpoints.push_back(i == 0 ? span : (i + 1 == fwd.size() ? 0.0 : b - fwd[i]));
  out.weights.reserve(fwd.size() - 1);
  for (std::size_t i = fwd.size() - 1; i-- > 0;)
    out.weights.push_back(lam.weights_at(0.5 * (fwd[i] + fwd[i + 1])));
  return out;
}

// Member run backward on [0, span] turned into the forward segment on
// [t_begin, t_end]; boundary times placed exactly.
Trajectory forward_from_backward(const Trajectory& member, double t_begin, double t_end) {
  const std::vector<double>& s = member.times();
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  times.reserve(s.size());
  states.reserve(s.size());
  for (std::size_t i = s.size(); i-- > 0;) {
    double t = i == 0 ? t_end : (i + 1 == s.size() ? t_begin : t_end - s[i]);
    times.push_back(t);
    states.push_back(member.state(i));
  }
  return Trajectory(std::move(times), std::move(states));
}

void check_reference_span(const Trajectory& z, const SegmentPlan& plan) {
  double scale = std::max(1.0, z.t_end() - z.t_begin());
  if (std::fabs(z.t_begin() - plan.times.front()) > 1e-9 * scale ||
      std::fabs(z.t_end() - plan.times.back()) > 1e-9 * scale)
    throw std::invalid_argument("horizon: reference span does not match the plan");
}

}  // namespace

BackwardSegment backward_segment(const PolytopicField& field, const Trajectory& z,
                                 const RelaxedControl& lam, int k, const SegmentPlan& plan,
                                 double epsilon, double step, Rng& rng,
                                 const TubeSelectionOptions& opt) {
  plan.validate();
  if (k < 1 || k > plan.segments())
    throw std::invalid_argument("backward_segment: segment index out of range");

  BackwardSegment seg;
  seg.k = k;
  seg.t_begin = plan.times[k - 1];
  seg.t_end = plan.times[k];
  seg.epsilon = epsilon;
  seg.cap = k < plan.segments() ? plan.entry_cap(k) : std::numeric_limits<double>::infinity();
  seg.field = reverse_field(field, seg.t_begin, seg.t_end);
  seg.reference = reverse_trajectory_slice(z, seg.t_begin, seg.t_end);
  seg.control = reverse_control_slice(lam, seg.t_begin, seg.t_end);
  seg.family = tube_selection(seg.field, seg.reference, seg.control, epsilon, step, rng, opt);
  if (seg.family.delta > seg.cap) seg.family.delta = seg.cap;
  return seg;
}

HorizonResult horizon_approximate(const PolytopicField& field, const Trajectory& z,
                                  const RelaxedControl& lam, const Radius& r,
                                  const SegmentPlan& plan, double step, Rng& rng,
                                  const TubeSelectionOptions& opt) {
  plan.validate();
  check_reference_span(z, plan);
  const int K = plan.segments();
  const double total = plan.times.back() - plan.times.front();
  const double tol = integration_tolerance(step, total);

  HorizonResult res;
  res.segments.resize(K);
  res.tolerance = tol;

  std::vector<Trajectory> forward(K + 1);
  Eigen::VectorXd anchor = z.at(plan.times.back());

  for (int k = K; k >= 1; --k) {
    double eps_k = std::min(plan.entry_cap(k - 1), plan.segment_radius(k));
    Rng seg_rng = rng.fork(static_cast<std::uint64_t>(k));
    BackwardSegment seg;
    try {
      seg = backward_segment(field, z, lam, k, plan, eps_k, step, seg_rng, opt);
    } catch (const std::exception& e) {
      throw ApproximationError("horizon: segment " + std::to_string(k) +
                               " failed: " + e.what());
    }

    Trajectory member = seg.family.member(seg.field, anchor, step);
    SegmentReport& rep = res.segments[k - 1];
    rep.k = k;
    rep.t_begin = seg.t_begin;
    rep.t_end = seg.t_end;
    rep.epsilon = seg.epsilon;
    rep.delta = seg.family.delta;
    rep.cap = seg.cap;
    rep.slices = seg.family.slices;
    rep.chatter_gap = seg.family.chatter_gap;
    rep.achieved_gap = sup_gap(seg.reference, member);
    rep.halvings = seg.family.halvings;

    anchor = member.states().back();
    rep.anchor_gap = (anchor - seg.reference.states().back()).norm();
    forward[k] = forward_from_backward(member, seg.t_begin, seg.t_end);
  }

  // anchor_in_ball: the landing point of segment k must fit in the entry
  // ball of segment k-1 (whose delta is known only after its own run), and
  // segment 1 must land inside B(z(0), r(0)).
  for (int k = 2; k <= K; ++k)
    res.segments[k - 1].anchor_in_ball =
        res.segments[k - 1].anchor_gap <= res.segments[k - 2].delta + tol;
  res.segments[0].anchor_in_ball = res.segments[0].anchor_gap <= r.at(0.0) + tol;

  res.eta0 = anchor;
  res.initial_gap = (res.eta0 - z.at(plan.times.front())).norm();

  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  for (int k = 1; k <= K; ++k) {
    const Trajectory& seg = forward[k];
    std::size_t first = k == 1 ? 0 : 1;  // seam point already present
    for (std::size_t i = first; i < seg.size(); ++i) {
      times.push_back(seg.times()[i]);
      states.push_back(seg.state(i));
    }
  }
  res.trajectory = Trajectory(std::move(times), std::move(states));

  res.worst_gap = -1.0;
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    double t = res.trajectory.times()[i];
    double gap = (z.at(t) - res.trajectory.state(i)).norm();
    double rt = r.at(t);
    if (gap > res.worst_gap) {
      res.worst_gap = gap;
      res.worst_gap_time = t;
    }
    res.worst_gap_ratio = std::max(res.worst_gap_ratio, gap / rt);
    if (gap > rt + tol)
      throw ApproximationError("horizon: tube bound violated, gap " + std::to_string(gap) +
                               " > r = " + std::to_string(rt) + " at t = " +
                               std::to_string(t));
  }
  return res;
}

CompletenessReport completeness_probe(const PolytopicField& field,
                                      const std::vector<Eigen::VectorXd>& starts,
                                      double t_max, int trials, double step,
                                      double threshold, const Rng& base,
                                      int probe_segments, int jobs) {
  field.validate();
  if (starts.empty()) throw std::invalid_argument("completeness_probe: no start states");
  if (trials < 1) throw std::invalid_argument("completeness_probe: trials must be >= 1");
  if (probe_segments < 1)
    throw std::invalid_argument("completeness_probe: probe_segments must be >= 1");
  if (!(t_max > 0.0)) throw std::invalid_argument("completeness_probe: t_max must be > 0");

  CompletenessReport rep;
  rep.trials = trials;
  rep.t_max = t_max;
  rep.threshold = threshold;
  rep.segments = probe_segments;
  rep.entries.resize(starts.size());

  const int m = field.vertex_count();
  const long total_tasks = static_cast<long>(starts.size()) * 2 * trials;

  for (std::size_t s = 0; s < starts.size(); ++s) {
    rep.entries[s].start = starts[s];
    rep.entries[s].switching.resize(trials);
    rep.entries[s].relaxed.resize(trials);
  }

  auto run_task = [&](long task) {
    std::size_t s = static_cast<std::size_t>(task / (2L * trials));
    int rest = static_cast<int>(task % (2L * trials));
    bool relaxed_column = rest >= trials;
    int trial = rest % trials;
    Rng rng = base.fork(static_cast<std::uint64_t>(task) + 1);
    EscapeReport r;
    if (relaxed_column) {
      RelaxedControl lam = random_relaxed_control(m, 0.0, t_max, probe_segments, rng);
      r = detect_escape(field, lam, starts[s], t_max, step, threshold);
    } else {
      SwitchingSignal u = random_switching_signal(m, 0.0, t_max, probe_segments, rng);
      r = detect_escape(field, u, starts[s], t_max, step, threshold);
    }
    r.path = Trajectory();  // keep the report light
    (relaxed_column ? rep.entries[s].relaxed : rep.entries[s].switching)[trial] =
        std::move(r);
  };

  if (jobs <= 1) {
    for (long task = 0; task < total_tasks; ++task) run_task(task);
  } else {
    std::atomic<long> next{0};
    auto worker = [&] {
      for (long task = next.fetch_add(1); task < total_tasks; task = next.fetch_add(1))
        run_task(task);
    };
    std::vector<std::thread> pool;
    int n_threads = std::min<long>(jobs, total_tasks);
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  for (CompletenessEntry& e : rep.entries) {
    for (const EscapeReport& r : e.switching) e.switching_escaped |= r.escaped;
    for (const EscapeReport& r : e.relaxed) e.relaxed_escaped |= r.escaped;
    e.disagreement = e.switching_escaped != e.relaxed_escaped;
    rep.any_disagreement |= e.disagreement;
  }
  return rep;
}

}  // namespace tubeflow
