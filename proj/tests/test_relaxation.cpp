#include <doctest.h>

#include <cmath>
#include <vector>

#include "tubeflow/errors.hpp"
#include "tubeflow/relaxation.hpp"

using namespace tubeflow;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

PolytopicField counterexample_field() {
  PolytopicField f;
  f.dimension = 2;
  f.vertices.push_back(parse_vector_expr({"x2^2", "-1"}));
  f.vertices.push_back(parse_vector_expr({"x2^2", "1"}));
  f.validate();
  return f;
}

RelaxedControl half_half(double t0, double t1) {
  RelaxedControl lam;
  lam.breakpoints = {t0, t1};
  lam.weights = {{0.5, 0.5}};
  return lam;
}

}  // namespace

TEST_CASE("chatter plan slices the interval by midpoint weights") {
  RelaxedControl lam = half_half(0.0, 1.0);
  ChatterPlan plan = make_chatter_plan(lam, 4);
  CHECK(plan.slice_count == 4);
  CHECK(plan.slice_width() == 0.25);
  CHECK(plan.slice_boundary(0) == 0.0);
  CHECK(plan.slice_boundary(4) == 1.0);
  REQUIRE(plan.durations.size() == 4);
  for (const std::vector<double>& row : plan.durations) {
    REQUIRE(row.size() == 2);
    CHECK(row[0] == 0.125);
    CHECK(row[1] == 0.125);
  }

  // Uneven weights: (1/4, 3/4) over one slice of width 1.
  RelaxedControl uneven;
  uneven.breakpoints = {0.0, 1.0};
  uneven.weights = {{0.25, 0.75}};
  ChatterPlan p1 = make_chatter_plan(uneven, 1);
  CHECK(p1.durations[0][0] == 0.25);
  CHECK(p1.durations[0][1] == 0.75);

  // Piecewise weights sampled at slice midpoints: jump at 0.5 lands the
  // first two slices on (1,0) and the last two on (0,1).
  RelaxedControl pw;
  pw.breakpoints = {0.0, 0.5, 1.0};
  pw.weights = {{1.0, 0.0}, {0.0, 1.0}};
  ChatterPlan p2 = make_chatter_plan(pw, 4);
  CHECK(p2.durations[0][0] == 0.25);
  CHECK(p2.durations[1][0] == 0.25);
  CHECK(p2.durations[2][1] == 0.25);
  CHECK(p2.durations[3][1] == 0.25);

  // Visit order is validated as a permutation.
  CHECK_THROWS_AS(make_chatter_plan(lam, 4, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(make_chatter_plan(lam, 4, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(make_chatter_plan(lam, 0), std::invalid_argument);
}

TEST_CASE("flatten covers every slice exactly and merges runs") {
  // Degenerate weights: the flat signal is a single interval on vertex 2.
  RelaxedControl deg;
  deg.breakpoints = {0.0, 1.0};
  deg.weights = {{0.0, 1.0}};
  SwitchingSignal u = chatter_control(deg, 8);
  CHECK(u.breakpoints == std::vector<double>{0.0, 1.0});
  CHECK(u.indices == std::vector<int>{2});

  // Half-half with N slices: 2N pieces, alternating 1, 2, 1, 2, ...
  SwitchingSignal hh = chatter_control(half_half(0, 1), 2);
  CHECK(hh.indices == std::vector<int>{1, 2, 1, 2});
  REQUIRE(hh.breakpoints.size() == 5);
  CHECK(hh.breakpoints.front() == 0.0);
  CHECK(hh.breakpoints.back() == 1.0);
  CHECK(hh.breakpoints[1] == 0.25);
  CHECK(hh.breakpoints[2] == 0.5);
  CHECK(hh.breakpoints[3] == 0.75);

  // Adjacent equal vertices across a slice boundary merge: a weight jump at
  // 0.5 makes slices 1-2 pure vertex 1 and slices 3-4 pure vertex 2.
  RelaxedControl jump;
  jump.breakpoints = {0.0, 0.5, 1.0};
  jump.weights = {{1.0, 0.0}, {0.0, 1.0}};
  SwitchingSignal merged = chatter_control(jump, 4);
  CHECK(merged.indices == std::vector<int>{1, 2});
  CHECK(merged.breakpoints == std::vector<double>{0.0, 0.5, 1.0});

  // Conservation: picked-up durations tile each slice exactly even for
  // weights with no finite binary expansion.
  RelaxedControl thirds;
  thirds.breakpoints = {0.0, 1.0};
  thirds.weights = {{1.0 / 3.0, 2.0 / 3.0}};
  ChatterPlan plan = make_chatter_plan(thirds, 7);
  SwitchingSignal tu = flatten_plan(plan);
  tu.validate(2);
  CHECK(tu.breakpoints.front() == 0.0);
  CHECK(tu.breakpoints.back() == 1.0);
  // Every slice boundary appears exactly (the rounding absorber pins them).
  for (int j = 0; j <= 7; ++j) {
    bool found = false;
    for (double b : tu.breakpoints) found |= b == plan.slice_boundary(j);
    CHECK(found);
  }
}

TEST_CASE("chattered run drifts by the closed form") {
  // Half-half chatter of the bang-bang drift system on [0, 1]:
  // x(1) = 1/(12 N^2) exactly, y(1) = 0.
  PolytopicField f = counterexample_field();
  for (int n : {1, 2, 4, 16}) {
    SwitchingSignal u = chatter_control(half_half(0, 1), n);
    Trajectory x = integrate_switching(f, u, vec2(0, 0), 1e-3);
    CHECK(x.states().back()(0) ==
          doctest::Approx(1.0 / (12.0 * n * n)).epsilon(1e-12));
    CHECK(std::fabs(x.states().back()(1)) <= 1e-15);
  }
}

TEST_CASE("sup gap of the chattered run follows the 1/(2N) envelope") {
  PolytopicField f = counterexample_field();
  RelaxedControl lam = half_half(0, 1);
  Trajectory z = integrate_relaxed(f, lam, vec2(0, 0), 1e-3);
  double tol = integration_tolerance(1e-3, 1.0);

  double prev = 0.0;
  for (int n = 1; n <= 256; n *= 2) {
    SwitchingSignal u = chatter_control(lam, n);
    Trajectory x = integrate_switching(f, u, vec2(0, 0), 1e-3);
    double gap = sup_gap(z, x);

    // The gap peaks at a half-slice point: triangle amplitude 1/(2N) in y
    // with the accumulated drift (at most 1/(12N^2)) in x.
    double amp = 1.0 / (2.0 * n);
    double drift = 1.0 / (12.0 * n * n);
    double envelope = std::sqrt(amp * amp + drift * drift);
    CHECK(gap <= envelope + tol);
    CHECK(gap >= amp - tol);

    if (n > 1) {
      double ratio = gap / prev;
      CHECK(ratio >= 0.4);
      CHECK(ratio <= 0.6);
    }
    prev = gap;
  }
}

TEST_CASE("chatter_approximate doubles until the target holds") {
  PolytopicField f = counterexample_field();
  RelaxedControl lam = half_half(0, 1);
  Trajectory z = integrate_relaxed(f, lam, vec2(0, 0), 1e-3);

  // Gap after N slices is about 1/(2N): eps = 0.1 needs N = 8,
  // eps = 0.01 needs N = 64 on the doubling ladder.
  ChatterApprox a = chatter_approximate(f, z, lam, 0.1, 1e-3);
  CHECK(a.slices == 8);
  CHECK(a.gap <= 0.1);
  CHECK(a.trajectory.states().front() == z.states().front());

  ChatterApprox b = chatter_approximate(f, z, lam, 0.01, 1e-3);
  CHECK(b.slices == 64);
  CHECK(b.gap <= 0.01);

  // An unreachable target exhausts the slice budget.
  CHECK_THROWS_AS(chatter_approximate(f, z, lam, 1e-9, 1e-3, 1 << 10),
                  ApproximationError);
  // A target below the integration tolerance is rejected outright.
  CHECK_THROWS_AS(chatter_approximate(f, z, lam, 1e-13, 1e-3),
                  ApproximationError);
}

TEST_CASE("entry ball radius round trip") {
  CHECK(entry_ball_radius(0.1, 2.0) ==
        doctest::Approx(0.1 / (4.0 * std::exp(2.0))).epsilon(1e-15));
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    double eps = rng.uniform(1e-3, 10.0);
    double k = rng.uniform(0.0, 10.0);
    double delta = entry_ball_radius(eps, k);
    CHECK(std::fabs(delta * 4.0 * std::exp(k) - eps) <= 1e-12);
  }
  CHECK_THROWS_AS(entry_ball_radius(-0.1, 1.0), std::invalid_argument);
}

TEST_CASE("tube_selection verifies a family on the drift system") {
  PolytopicField f = counterexample_field();
  RelaxedControl lam = half_half(0, 1);
  Trajectory z = integrate_relaxed(f, lam, vec2(0, 0), 1e-3);

  // Analytic bounds on the unit-inflated 0.2 tube (ball radius 1.2):
  // sup |f| = sqrt(1.2^4 + 1), field Lipschitz constant 2.4.
  TubeSelectionOptions opt;
  BoundsEstimate analytic;
  analytic.ball_radius = 1.2;
  analytic.value_bound = std::sqrt(std::pow(1.2, 4.0) + 1.0);
  analytic.lipschitz = 2.4;
  analytic.residual = analytic.value_bound;
  opt.bounds = analytic;

  Rng rng(17);
  SelectionFamily fam = tube_selection(f, z, lam, 0.2, 1e-3, rng, opt);

  CHECK(fam.center == vec2(0, 0));
  CHECK(fam.epsilon == 0.2);
  double k = analytic.value_bound + analytic.lipschitz;
  CHECK(fam.k_integral == doctest::Approx(k).epsilon(1e-15));
  CHECK(fam.delta <= entry_ball_radius(0.2, k) + 1e-18);
  CHECK(fam.delta > 0.0);
  CHECK(fam.chatter_gap <= 0.1);
  CHECK(fam.slices == 8);  // first N on the doubling ladder with gap under 0.1
  CHECK(fam.bounds.lipschitz == 2.4);

  // Independent member check: random starts in the delta ball stay within
  // epsilon plus integration slack.
  double tol = integration_tolerance(1e-3, 1.0);
  Rng probe(99);
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd eta = fam.center + probe.in_ball(2, fam.delta);
    Trajectory m = fam.member(f, eta, 1e-3);
    CHECK(sup_gap(z, m) <= fam.epsilon + tol);
  }

  // The family is reproducible from its pieces: member(center) == base.
  Trajectory again = fam.member(f, fam.center, 1e-3);
  CHECK(sup_gap(again, fam.base) == 0.0);
}

TEST_CASE("tube_selection with estimated bounds stays verified") {
  PolytopicField f = counterexample_field();
  RelaxedControl lam = half_half(0, 1);
  Trajectory z = integrate_relaxed(f, lam, vec2(0, 0), 1e-3);

  Rng rng(2027);
  SelectionFamily fam = tube_selection(f, z, lam, 0.2, 1e-3, rng);
  CHECK(fam.bounds.sample_count == 4000);
  CHECK(fam.bounds.ball_radius == doctest::Approx(1.2).epsilon(1e-12));
  // Sampled bounds undershoot analytic ones, never exceed them.
  CHECK(fam.bounds.lipschitz <= 2.4 + 1e-9);
  CHECK(fam.bounds.value_bound <= std::sqrt(std::pow(1.2, 4.0) + 1.0));
  CHECK(fam.delta >= entry_ball_radius(0.2, (2.4 + std::sqrt(std::pow(1.2, 4.0) + 1.0))));
  CHECK(fam.halvings == 0);

  double tol = integration_tolerance(1e-3, 1.0);
  Rng probe(7);
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd eta = fam.center + probe.in_ball(2, fam.delta);
    CHECK(sup_gap(z, fam.member(f, eta, 1e-3)) <= fam.epsilon + tol);
  }
}

TEST_CASE("tube_selection rejects an unreachable epsilon") {
  PolytopicField f = counterexample_field();
  RelaxedControl lam = half_half(0, 1);
  Trajectory z = integrate_relaxed(f, lam, vec2(0, 0), 1e-2);
  Rng rng(1);
  TubeSelectionOptions opt;
  opt.max_slices = 16;  // caps the doubling ladder below the needed N
  CHECK_THROWS_AS(tube_selection(f, z, lam, 1e-4, 1e-2, rng, opt),
                  ApproximationError);
}
