#include "tubeflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "tubeflow/errors.hpp"

namespace tubeflow {

namespace {

constexpr double kHardNormCap = 1e302;

// Grid over [cuts.front(), cuts.back()] that contains every cut exactly and
// has local spacing <= h inside each piece.
std::vector<double> build_grid(const std::vector<double>& cuts, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("integrate: step must be positive");
  std::vector<double> grid;
  grid.push_back(cuts.front());
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    double a = cuts[p], b = cuts[p + 1];
    double len = b - a;
    long n = std::max(1L, static_cast<long>(std::ceil(len / h - 1e-9)));
    for (long j = 1; j < n; ++j) grid.push_back(a + len * j / n);
    grid.push_back(b);
  }
  return grid;
}

// dx <- rhs of piece `piece` at (t, x).
using PieceRhs = std::function<void(int piece, double t, const Eigen::VectorXd& x,
                                    Eigen::VectorXd& dx)>;

struct CoreResult {
  Trajectory path;
  bool escaped = false;
  double escape_time = 0.0;
  double final_norm = 0.0;
};

CoreResult integrate_core(const std::vector<double>& cuts, const PieceRhs& rhs,
                          const Eigen::VectorXd& x0, double h, double escape_threshold) {
  const bool report_escape = escape_threshold > 0.0;
  std::vector<double> grid = build_grid(cuts, h);

  std::vector<Eigen::VectorXd> states;
  states.reserve(grid.size());
  states.push_back(x0);

  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n), x = x0;

  CoreResult out;
  out.final_norm = x0.norm();
  if (report_escape && (!x0.allFinite() || out.final_norm > escape_threshold)) {
    out.escaped = true;
    out.escape_time = grid.front();
    out.path = Trajectory({grid.front()}, {x0});
    return out;
  }

  std::size_t piece = 0;
  std::size_t filled = 1;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    double t0 = grid[j], t1 = grid[j + 1];
    double mid = 0.5 * (t0 + t1);
    while (piece + 2 < cuts.size() && cuts[piece + 1] <= mid) ++piece;
    double dt = t1 - t0;
    int p = static_cast<int>(piece);

    try {
      rhs(p, t0, x, k1);
      tmp = x + (0.5 * dt) * k1;
      rhs(p, t0 + 0.5 * dt, tmp, k2);
      tmp = x + (0.5 * dt) * k2;
      rhs(p, t0 + 0.5 * dt, tmp, k3);
      tmp = x + dt * k3;
      rhs(p, t1, tmp, k4);
    } catch (const EvalError&) {
      // A field value overflowed double range mid step.  Under escape
      // detection that is an escape at the last completed grid point; a
      // plain run has no sensible answer.
      if (report_escape) {
        out.escaped = true;
        out.escape_time = t0;
        break;
      }
      throw;
    }
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    states.push_back(x);
    ++filled;

    double norm = x.norm();
    bool bad = !x.allFinite();
    if (report_escape) {
      if (bad || norm > escape_threshold) {
        out.escaped = true;
        out.escape_time = t1;
        out.final_norm = norm;
        break;
      }
    } else if (bad || norm > kHardNormCap) {
      throw IntegrationError("state norm overflow near t = " + std::to_string(t1) +
                             "; use escape detection for blow-up runs");
    }
    out.final_norm = norm;
  }

  grid.resize(filled);
  out.path = Trajectory(std::move(grid), std::move(states));
  return out;
}

std::vector<double> control_cuts(const std::vector<double>& breakpoints) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("integrate: control needs at least one interval");
  return breakpoints;
}

PieceRhs switching_rhs(const PolytopicField& field, const SwitchingSignal& u) {
  return [&field, &u](int piece, double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    field.vertices[u.indices[piece] - 1].eval_into(t, x, dx);
  };
}

PieceRhs relaxed_rhs(const PolytopicField& field, const RelaxedControl& lam,
                     Eigen::VectorXd& scratch) {
  return [&field, &lam, &scratch](int piece, double t, const Eigen::VectorXd& x,
                                  Eigen::VectorXd& dx) {
    const std::vector<double>& w = lam.weights[piece];
    // A degenerate row evaluates exactly one vertex so that relaxed and
    // switching runs agree bit for bit.
    int live = -1;
    bool degenerate = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      if (live >= 0 || w[i] != 1.0) {
        degenerate = false;
        break;
      }
      live = static_cast<int>(i);
    }
    if (degenerate && live >= 0) {
      field.vertices[live].eval_into(t, x, dx);
      return;
    }
    dx.setZero();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      field.vertices[i].eval_into(t, x, scratch);
      dx += w[i] * scratch;
    }
  };
}

void check_start(const PolytopicField& field, const Eigen::VectorXd& x0) {
  field.validate();
  if (x0.size() != field.dimension)
    throw std::invalid_argument("integrate: initial state dimension mismatch");
}

// Union of two grids, exact duplicates removed.
std::vector<double> merge_grids(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void check_same_span(const Trajectory& a, const Trajectory& b, const char* what) {
  double scale = std::max(1.0, std::max(a.t_end() - a.t_begin(), b.t_end() - b.t_begin()));
  if (std::fabs(a.t_begin() - b.t_begin()) > 1e-9 * scale ||
      std::fabs(a.t_end() - b.t_end()) > 1e-9 * scale)
    throw std::invalid_argument(std::string(what) + ": trajectory spans differ");
  if (a.dimension() != b.dimension())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Trajectory integrate_switching(const PolytopicField& field, const SwitchingSignal& u,
                               const Eigen::VectorXd& x0, double step) {
  check_start(field, x0);
  u.validate(field.vertex_count());
  return integrate_core(control_cuts(u.breakpoints), switching_rhs(field, u), x0, step, 0.0)
      .path;
}

Trajectory integrate_relaxed(const PolytopicField& field, const RelaxedControl& lam,
                             const Eigen::VectorXd& x0, double step) {
  check_start(field, x0);
  lam.validate(field.vertex_count());
  Eigen::VectorXd scratch(field.dimension);
  return integrate_core(control_cuts(lam.breakpoints), relaxed_rhs(field, lam, scratch), x0,
                        step, 0.0)
      .path;
}

double ac_distance(const Trajectory& a, const Trajectory& b) {
  check_same_span(a, b, "ac_distance");
  std::vector<double> grid = merge_grids(a.times(), b.times());
  double t_lo = std::max(a.t_begin(), b.t_begin());
  double t_hi = std::min(a.t_end(), b.t_end());
  for (double& t : grid) t = std::clamp(t, t_lo, t_hi);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  Eigen::VectorXd pa = a.at(grid.front()), pb = b.at(grid.front());
  double total = (pa - pb).norm();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    Eigen::VectorXd qa = a.at(grid[i]), qb = b.at(grid[i]);
    total += ((qa - pa) - (qb - pb)).norm();
    pa = std::move(qa);
    pb = std::move(qb);
  }
  return total;
}

double sup_gap(const Trajectory& a, const Trajectory& b, double* arg_t) {
  check_same_span(a, b, "sup_gap");
  std::vector<double> grid = merge_grids(a.times(), b.times());
  double t_lo = std::max(a.t_begin(), b.t_begin());
  double t_hi = std::min(a.t_end(), b.t_end());
  double worst = -1.0, at = t_lo;
  for (double t : grid) {
    double tc = std::clamp(t, t_lo, t_hi);
    double g = (a.at(tc) - b.at(tc)).norm();
    if (g > worst) {
      worst = g;
      at = tc;
    }
  }
  if (arg_t) *arg_t = at;
  return worst;
}

double gronwall_bound(double eps0, double initial_gap, double k_integral) {
  if (eps0 < 0.0 || initial_gap < 0.0 || k_integral < 0.0)
    throw std::invalid_argument("gronwall_bound: negative input");
  return (eps0 + initial_gap) * std::exp(k_integral);
}

Trajectory reuse_control(const PolytopicField& field, const Trajectory& reference,
                         const SwitchingSignal& u_ref, const Eigen::VectorXd& eta,
                         double step, const BoundsEstimate* region) {
  double scale = std::max(1.0, reference.t_end() - reference.t_begin());
  if (std::fabs(reference.t_begin() - u_ref.t_begin()) > 1e-9 * scale ||
      std::fabs(reference.t_end() - u_ref.t_end()) > 1e-9 * scale)
    throw std::invalid_argument("reuse_control: control span does not match reference");
  Trajectory out = integrate_switching(field, u_ref, eta, step);
  if (region) {
    double worst = std::max(reference.max_norm(), out.max_norm());
    if (worst > region->ball_radius)
      throw IntegrationError(
          "reuse_control: trajectories leave the estimated-bounds ball (|x| up to " +
          std::to_string(worst) + " > R = " + std::to_string(region->ball_radius) +
          "); enlarge the region");
  }
  return out;
}

namespace {

EscapeReport run_escape(const PolytopicField& field, const std::vector<double>& cuts,
                        const PieceRhs& rhs, const Eigen::VectorXd& x0, double step,
                        double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("detect_escape: threshold must be > 0");
  CoreResult core = integrate_core(cuts, rhs, x0, step, threshold);
  EscapeReport rep;
  rep.escaped = core.escaped;
  if (core.escaped) rep.escape_time = core.escape_time;
  rep.threshold = threshold;
  rep.final_norm = core.final_norm;
  rep.path = std::move(core.path);
  return rep;
}

// Truncates the control's interval boundaries at t_max.  Piece p of the
// result is (a prefix of) interval p of the control, so piece-indexed RHS
// lookup stays valid.
std::vector<double> clip_cuts(const std::vector<double>& breakpoints, double t_max) {
  double slack = 1e-9 * std::max(1.0, std::fabs(t_max));
  if (breakpoints.back() < t_max - slack)
    throw std::invalid_argument("detect_escape: control does not cover the horizon");
  double t_end = std::min(t_max, breakpoints.back());
  std::vector<double> cuts;
  for (double b : breakpoints) {
    if (b < t_end) cuts.push_back(b);
  }
  cuts.push_back(t_end);
  if (cuts.size() < 2 || !(cuts.front() < t_end))
    throw std::invalid_argument("detect_escape: empty horizon");
  return cuts;
}

}  // namespace

EscapeReport detect_escape(const PolytopicField& field, const SwitchingSignal& u,
                           const Eigen::VectorXd& x0, double t_max, double step,
                           double threshold) {
  check_start(field, x0);
  u.validate(field.vertex_count());
  return run_escape(field, clip_cuts(u.breakpoints, t_max), switching_rhs(field, u), x0, step,
                    threshold);
}

EscapeReport detect_escape(const PolytopicField& field, const RelaxedControl& lam,
                           const Eigen::VectorXd& x0, double t_max, double step,
                           double threshold) {
  check_start(field, x0);
  lam.validate(field.vertex_count());
  Eigen::VectorXd scratch(field.dimension);
  return run_escape(field, clip_cuts(lam.breakpoints, t_max), relaxed_rhs(field, lam, scratch),
                    x0, step, threshold);
}

SwitchingSignal random_switching_signal(int vertex_count, double t0, double t1, int segments,
                                        Rng& rng) {
  if (segments < 1 || vertex_count < 1 || !(t0 < t1))
    throw std::invalid_argument("random_switching_signal: bad arguments");
  SwitchingSignal u;
  u.breakpoints.reserve(segments + 1);
  for (int j = 0; j <= segments; ++j) u.breakpoints.push_back(t0 + (t1 - t0) * j / segments);
  u.indices.reserve(segments);
  for (int j = 0; j < segments; ++j) u.indices.push_back(rng.uniform_int(1, vertex_count));
  return u;
}

RelaxedControl random_relaxed_control(int vertex_count, double t0, double t1, int segments,
                                      Rng& rng) {
  if (segments < 1 || vertex_count < 1 || !(t0 < t1))
    throw std::invalid_argument("random_relaxed_control: bad arguments");
  RelaxedControl lam;
  lam.breakpoints.reserve(segments + 1);
  for (int j = 0; j <= segments; ++j) lam.breakpoints.push_back(t0 + (t1 - t0) * j / segments);
  lam.weights.reserve(segments);
  for (int j = 0; j < segments; ++j) lam.weights.push_back(rng.on_simplex(vertex_count));
  return lam;
}

}  // namespace tubeflow
