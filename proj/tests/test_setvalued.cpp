#include <doctest.h>

#include <cmath>
#include <vector>

#include "tubeflow/errors.hpp"
#include "tubeflow/rng.hpp"
#include "tubeflow/setvalued.hpp"

using namespace tubeflow;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
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

}  // namespace

TEST_CASE("eval_set lists vertex values in order") {
  PolytopicField f = counterexample_field();
  std::vector<Eigen::VectorXd> vals = eval_set(f, 0.0, vec2(0.0, 3.0));
  REQUIRE(vals.size() == 2);
  CHECK(vals[0] == vec2(9.0, -1.0));
  CHECK(vals[1] == vec2(9.0, 1.0));

  f.t_max = 1.0;
  CHECK_THROWS_AS(eval_set(f, 2.0, vec2(0, 0)), std::out_of_range);
}

TEST_CASE("field validation") {
  PolytopicField f;
  f.dimension = 2;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);  // no vertices
  f.vertices.push_back(parse_vector_expr({"x1"}));       // wrong dimension
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("hausdorff distance on hand examples") {
  std::vector<Eigen::VectorXd> a = {vec2(0, 0)};
  std::vector<Eigen::VectorXd> b = {vec2(3, 4)};
  CHECK(hausdorff_distance(a, b) == 5.0);

  // {0} vs {-1, 2}: farthest b-point from the singleton wins.
  std::vector<Eigen::VectorXd> c = {vec1(0)};
  std::vector<Eigen::VectorXd> d = {vec1(-1), vec1(2)};
  CHECK(hausdorff_distance(c, d) == 2.0);
  CHECK(hausdorff_distance(d, c) == 2.0);

  // Subset at distance: {0, 1} vs {0, 1, 10} -> nearest of {0,1} to 10 is 1.
  std::vector<Eigen::VectorXd> e = {vec1(0), vec1(1)};
  std::vector<Eigen::VectorXd> g = {vec1(0), vec1(1), vec1(10)};
  CHECK(hausdorff_distance(e, g) == 9.0);
  CHECK(hausdorff_distance(e, e) == 0.0);
}

TEST_CASE("hausdorff distance is a metric on random sets") {
  Rng rng(11);
  auto random_set = [&](int n) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < n; ++i) pts.push_back(rng.in_ball(3, 2.0));
    return pts;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = random_set(1 + trial % 4);
    auto b = random_set(1 + (trial / 4) % 4);
    auto c = random_set(1 + (trial / 16) % 4);
    double ab = hausdorff_distance(a, b);
    double ba = hausdorff_distance(b, a);
    double ac = hausdorff_distance(a, c);
    double cb = hausdorff_distance(c, b);
    CHECK(ab == ba);                       // symmetry
    CHECK(ab >= 0.0);                      // nonnegativity
    CHECK(ab <= ac + cb + 1e-12);          // triangle inequality
    CHECK(hausdorff_distance(a, a) == 0.0);
  }
}

TEST_CASE("point to segment distance") {
  // Off the side, off the ends, and on the segment.
  CHECK(point_segment_distance(vec2(0, 1), vec2(-1, 0), vec2(1, 0)) == 1.0);
  CHECK(point_segment_distance(vec2(3, 4), vec2(-1, 0), vec2(1, 0)) ==
        doctest::Approx(std::sqrt(4 + 16)).epsilon(1e-15));
  CHECK(point_segment_distance(vec2(0.5, 0), vec2(-1, 0), vec2(1, 0)) == 0.0);
  // Degenerate segment is a point.
  CHECK(point_segment_distance(vec2(3, 4), vec2(0, 0), vec2(0, 0)) == 5.0);
}

TEST_CASE("radius evaluation") {
  Radius c = Radius::constant(0.25);
  CHECK(c.at(0.0) == 0.25);
  CHECK(c.at(100.0) == 0.25);
  CHECK(c.is_constant());
  CHECK(c.min_over(0.0, 5.0) == 0.25);

  Radius r = Radius::function_of_time(parse_expr("exp(-t)", 0));
  CHECK(!r.is_constant());
  CHECK(r.at(1.0) == std::exp(-1.0));
  // Decreasing function: sampled minimum over [a, b] is the right endpoint.
  CHECK(r.min_over(0.0, 2.0) == std::exp(-2.0));
  CHECK(r.text() == "exp(-t)");

  CHECK_THROWS_AS(Radius::constant(-1.0), std::invalid_argument);
  Radius neg = Radius::function_of_time(parse_expr("t-1", 0));
  CHECK_THROWS_AS(neg.at(0.0), EvalError);

  // Radius expressions must not reference state.
  CHECK_THROWS_AS(Radius::function_of_time(parse_expr("x1", 1)), std::invalid_argument);

  // Interior dip: min of 1.1 + sin(t) on [0, 2pi] is near t = 3pi/2.
  Radius dip = Radius::function_of_time(parse_expr("1.1 + sin(t)", 0));
  CHECK(dip.min_over(0.0, 2.0 * M_PI, 4096) ==
        doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("tube distance to the centerline") {
  // Two-point centerline: the segment from (0,0) to (1,0).
  Trajectory center({0.0, 1.0}, {vec2(0, 0), vec2(1, 0)});
  Tube tube{center, Radius::constant(0.5)};

  CHECK(tube_distance(tube, vec2(0.5, 0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(tube_distance(tube, vec2(2.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tube_distance(tube, vec2(-3.0, 4.0)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(tube_distance(tube, vec2(0.7, 0.0)) == 0.0);

  // Single-point centerline.
  Trajectory point({0.0}, {vec2(0, 0)});
  Tube ptube{point, Radius::constant(1.0)};
  CHECK(tube_distance(ptube, vec2(3, 4)) == 5.0);

  // contains() uses the time-sliced radius.
  Radius r = Radius::function_of_time(parse_expr("exp(-t)", 0));
  Tube shrinking{center, r};
  CHECK(shrinking.contains(0.0, vec2(0.0, 0.9)));
  CHECK(!shrinking.contains(1.0, vec2(1.0, 0.9)));
  CHECK(shrinking.contains(1.0, vec2(1.0, 0.3)));
}

TEST_CASE("truncation scales and vanishes") {
  PolytopicField f = counterexample_field();
  Trajectory center({0.0, 1.0}, {vec2(0, 0), vec2(0, 0)});
  TruncatedField tf = truncate_field(f, Tube{center, Radius::constant(0.2)});

  // On the centerline: scale 1, values untouched.
  CHECK(tf.scale(vec2(0, 0)) == 1.0);
  std::vector<Eigen::VectorXd> vals = tf.eval(0.0, vec2(0.0, 0.5));
  CHECK(vals[0] == 0.5 * vec2(0.25, -1.0));
  CHECK(vals[1] == 0.5 * vec2(0.25, 1.0));

  // Distance 1 and beyond: exactly the zero set.
  for (double d : {1.0, 1.5, 100.0}) {
    CHECK(tf.scale(vec2(0.0, d)) == 0.0);
    std::vector<Eigen::VectorXd> zero = tf.eval(0.0, vec2(0.0, d));
    CHECK(zero[0] == vec2(0, 0));
    CHECK(zero[1] == vec2(0, 0));
  }

  // The zero fast path never evaluates the field: a field that would throw
  // outside its time window still truncates cleanly far from the tube.
  PolytopicField sing;
  sing.dimension = 1;
  sing.vertices.push_back(parse_vector_expr({"1/x1"}));
  sing.validate();
  Trajectory c1({0.0}, {vec1(5.0)});
  TruncatedField tsing = truncate_field(sing, Tube{c1, Radius::constant(0.1)});
  CHECK(tsing.eval(0.0, vec1(0.0))[0] == vec1(0.0));  // 1/x1 would throw at 0
  // Inside the support the field is evaluated and scaled.
  CHECK(tsing.eval(0.0, vec1(4.5))[0] == vec1(0.5 * (1.0 / 4.5)));
}

TEST_CASE("estimated bounds grow with sample count and bound by below") {
  PolytopicField f = counterexample_field();
  Eigen::VectorXd center = vec2(0, 0);

  // On B(0, 1.2): sup |f| = sqrt(1.2^4 + 1), Lipschitz constant 2.4.
  double alpha = std::sqrt(std::pow(1.2, 4.0) + 1.0);
  Rng rng_small(5);
  Rng rng_big(5);
  BoundsEstimate small = estimate_bounds(f, center, 1.2, 0.0, 1.0, 500, rng_small);
  BoundsEstimate big = estimate_bounds(f, center, 1.2, 0.0, 1.0, 4000, rng_big);

  CHECK(small.ball_radius == 1.2);
  CHECK(small.sample_count == 500);
  CHECK(big.sample_count == 4000);

  // Same seed: the longer run extends the shorter one, so estimates only grow.
  CHECK(big.value_bound >= small.value_bound);
  CHECK(big.lipschitz >= small.lipschitz);

  // Sampled suprema stay below the analytic values but get close.
  CHECK(big.value_bound <= alpha);
  CHECK(big.lipschitz <= 2.4 + 1e-9);
  CHECK(big.value_bound > 0.8 * alpha);
  CHECK(big.lipschitz > 0.8 * 2.4);

  CHECK(big.residual == doctest::Approx(big.value_bound).epsilon(1e-15));

  Rng r2(5);
  CHECK_THROWS_AS(estimate_bounds(f, center, 1.2, 0.0, 1.0, 1, r2),
                  std::invalid_argument);
}

TEST_CASE("reverse field flips sign and time") {
  // f(t, x) = t * x on [0, 3] reversed: g(s, x) = -(3 - s) * x on [0, 3].
  PolytopicField f;
  f.dimension = 1;
  f.vertices.push_back(parse_vector_expr({"t*x1"}));
  f.t_min = 0.0;
  f.t_max = 3.0;
  f.validate();

  PolytopicField g = reverse_field(f, 0.0, 3.0);
  CHECK(g.t_min == 0.0);
  CHECK(g.t_max == 3.0);
  Eigen::VectorXd x = vec1(2.0);
  for (double s : {0.0, 0.7, 3.0}) {
    double want = -(3.0 - s) * 2.0;
    CHECK(g.vertices[0].eval(s, x)(0) == doctest::Approx(want).epsilon(1e-15));
  }

  // Autonomous fields reverse to their negation.
  PolytopicField a = counterexample_field();
  PolytopicField ra = reverse_field(a, 1.0, 4.0);
  Eigen::VectorXd p = vec2(0.3, -0.7);
  for (int i = 0; i < 2; ++i)
    CHECK(ra.vertices[i].eval(0.5, p) == -a.vertices[i].eval(2.5, p));

  // Double reversal restores the original values.
  PolytopicField rra = reverse_field(ra, 0.0, 3.0);
  for (int i = 0; i < 2; ++i)
    CHECK(rra.vertices[i].eval(1.5, p) == a.vertices[i].eval(1.5, p));
}

TEST_CASE("truncated field obeys the damped lipschitz bound") {
  // Pairs in B(0, 1.2) against the 0.2-tube around the origin on [0,1]:
  // d_H(F~(x), F~(y)) <= (alpha + k0) |x - y| with alpha = sqrt(1.2^4 + 1),
  // k0 = 2.4. Also drives the pure vertex-pairing bound.
  PolytopicField f = counterexample_field();
  Trajectory center({0.0, 1.0}, {vec2(0, 0), vec2(0, 0)});
  TruncatedField tf = truncate_field(f, Tube{center, Radius::constant(0.2)});

  double alpha = std::sqrt(std::pow(1.2, 4.0) + 1.0);
  double bound_rate = alpha + 2.4;

  Rng rng(23);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd x = rng.in_ball(2, 1.2);
    Eigen::VectorXd y = rng.in_ball(2, 1.2);
    double lhs = hausdorff_distance(tf.eval(0.5, x), tf.eval(0.5, y));
    CHECK(lhs <= bound_rate * (x - y).norm() + 1e-9);
  }
}
