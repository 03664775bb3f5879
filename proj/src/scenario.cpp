#include "tubeflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "tubeflow/errors.hpp"
#include "tubeflow/horizon.hpp"
#include "tubeflow/integrate.hpp"
#include "tubeflow/io.hpp"
#include "tubeflow/relaxation.hpp"
#include "tubeflow/rng.hpp"

namespace tubeflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError("scenario: " + msg); }

double require_number(const json& j, const std::string& key) {
  if (!j.is_number()) fail("'" + key + "' must be a number");
  return j.get<double>();
}

double positive_number(const json& j, const std::string& key) {
  double v = require_number(j, key);
  if (!(v > 0.0)) fail("'" + key + "' must be > 0");
  return v;
}

int positive_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail("'" + key + "' must be an integer");
  long v = j.get<long>();
  if (v < 1 || v > std::numeric_limits<int>::max()) fail("'" + key + "' out of range");
  return static_cast<int>(v);
}

std::vector<double> number_list(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail("'" + key + "' must be a nonempty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& e : j) out.push_back(require_number(e, key));
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "' in " + where);
}

SwitchingSignal parse_switching(const json& j) {
  check_keys(j, {"breakpoints", "indices"}, "'switching'");
  if (!j.contains("breakpoints") || !j.contains("indices"))
    fail("'switching' needs 'breakpoints' and 'indices'");
  SwitchingSignal u;
  u.breakpoints = number_list(j.at("breakpoints"), "switching.breakpoints");
  for (const json& e : j.at("indices"))
    u.indices.push_back(positive_int(e, "switching.indices"));
  return u;
}

RelaxedControl parse_relaxed(const json& j) {
  check_keys(j, {"breakpoints", "weights"}, "'relaxed'");
  if (!j.contains("breakpoints") || !j.contains("weights"))
    fail("'relaxed' needs 'breakpoints' and 'weights'");
  RelaxedControl lam;
  lam.breakpoints = number_list(j.at("breakpoints"), "relaxed.breakpoints");
  if (!j.at("weights").is_array()) fail("'relaxed.weights' must be an array of rows");
  for (const json& row : j.at("weights"))
    lam.weights.push_back(number_list(row, "relaxed.weights"));
  return lam;
}

Radius parse_radius(const json& j, int) {
  if (j.is_number()) return Radius::constant(j.get<double>());
  if (j.is_string()) {
    Expr e;
    try {
      e = parse_expr(j.get<std::string>(), 0);
    } catch (const ParseError& pe) {
      fail(std::string("bad radius expression: ") + pe.what());
    }
    return Radius::function_of_time(std::move(e));
  }
  fail("'radius' must be a number or an expression string in t");
}

}  // namespace

SwitchingSignal Scenario::effective_switching() const {
  if (switching) return *switching;
  SwitchingSignal u;
  u.breakpoints = {0.0, horizon};
  u.indices = {1};
  return u;
}

RelaxedControl Scenario::effective_relaxed() const {
  if (relaxed) return *relaxed;
  RelaxedControl lam;
  lam.breakpoints = {0.0, horizon};
  int m = field.vertex_count();
  lam.weights = {std::vector<double>(m, 1.0 / m)};
  return lam;
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) fail("document must be a JSON object");
  check_keys(doc,
             {"name", "description", "dimension", "vertices", "initial", "horizon", "step",
              "radius", "segment_width", "switching", "relaxed", "epsilon", "slices",
              "origin_slices", "seed", "threshold", "t_max", "trials", "probe_segments",
              "starts", "bounds"},
             "scenario");

  Scenario s;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) fail("'name' must be a string");
    s.name = doc.at("name").get<std::string>();
  }
  if (doc.contains("description")) {
    if (!doc.at("description").is_string()) fail("'description' must be a string");
    s.description = doc.at("description").get<std::string>();
  }

  if (!doc.contains("dimension") || !doc.contains("vertices") || !doc.contains("initial"))
    fail("'dimension', 'vertices' and 'initial' are required");
  s.dimension = positive_int(doc.at("dimension"), "dimension");

  const json& verts = doc.at("vertices");
  if (!verts.is_array() || verts.empty()) fail("'vertices' must be a nonempty array");
  for (const json& row : verts) {
    if (!row.is_array() || static_cast<int>(row.size()) != s.dimension)
      fail("each vertex needs exactly 'dimension' component expressions");
    std::vector<std::string> comps;
    for (const json& c : row) {
      if (!c.is_string()) fail("vertex components must be expression strings");
      comps.push_back(c.get<std::string>());
    }
    s.vertex_sources.push_back(std::move(comps));
  }

  s.field.dimension = s.dimension;
  for (const std::vector<std::string>& comps : s.vertex_sources) {
    try {
      s.field.vertices.push_back(parse_vector_expr(comps));
    } catch (const ParseError& pe) {
      fail(std::string("bad vertex expression: ") + pe.what());
    }
  }
  s.field.t_min = 0.0;
  s.field.t_max = std::numeric_limits<double>::infinity();
  s.field.validate();

  std::vector<double> init = number_list(doc.at("initial"), "initial");
  if (static_cast<int>(init.size()) != s.dimension) fail("'initial' has the wrong dimension");
  s.initial = Eigen::Map<Eigen::VectorXd>(init.data(), init.size());

  if (doc.contains("horizon")) s.horizon = positive_number(doc.at("horizon"), "horizon");
  if (doc.contains("step")) s.step = positive_number(doc.at("step"), "step");
  if (doc.contains("radius")) s.radius = parse_radius(doc.at("radius"), s.dimension);
  if (doc.contains("segment_width"))
    s.segment_width = positive_number(doc.at("segment_width"), "segment_width");
  if (doc.contains("switching")) {
    s.switching = parse_switching(doc.at("switching"));
    try {
      s.switching->validate(s.field.vertex_count());
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (doc.contains("relaxed")) {
    s.relaxed = parse_relaxed(doc.at("relaxed"));
    try {
      s.relaxed->validate(s.field.vertex_count());
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (doc.contains("epsilon")) s.epsilon = positive_number(doc.at("epsilon"), "epsilon");
  if (doc.contains("slices")) s.slices = positive_int(doc.at("slices"), "slices");
  if (doc.contains("origin_slices")) {
    s.origin_slices.clear();
    for (const json& e : doc.at("origin_slices"))
      s.origin_slices.push_back(positive_int(e, "origin_slices"));
    if (s.origin_slices.empty()) fail("'origin_slices' must be nonempty");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
      fail("'seed' must be a nonnegative integer");
    long long v = doc.at("seed").get<long long>();
    if (v < 0) fail("'seed' must be a nonnegative integer");
    s.seed = static_cast<std::uint64_t>(v);
  }
  if (doc.contains("threshold")) s.threshold = positive_number(doc.at("threshold"), "threshold");
  if (doc.contains("t_max")) s.t_max = positive_number(doc.at("t_max"), "t_max");
  if (doc.contains("trials")) s.trials = positive_int(doc.at("trials"), "trials");
  if (doc.contains("probe_segments"))
    s.probe_segments = positive_int(doc.at("probe_segments"), "probe_segments");
  if (doc.contains("starts")) {
    for (const json& row : doc.at("starts")) {
      std::vector<double> v = number_list(row, "starts");
      if (static_cast<int>(v.size()) != s.dimension) fail("'starts' entry has wrong dimension");
      s.starts.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), v.size()));
    }
    if (s.starts.empty()) fail("'starts' must be nonempty when present");
  }
  if (doc.contains("bounds")) {
    const json& b = doc.at("bounds");
    check_keys(b, {"lipschitz", "value_bound", "ball_radius"}, "'bounds'");
    if (!b.contains("lipschitz") || !b.contains("value_bound"))
      fail("'bounds' needs 'lipschitz' and 'value_bound'");
    BoundsEstimate be;
    be.lipschitz = require_number(b.at("lipschitz"), "bounds.lipschitz");
    be.value_bound = require_number(b.at("value_bound"), "bounds.value_bound");
    if (be.lipschitz < 0.0 || be.value_bound < 0.0) fail("'bounds' must be nonnegative");
    be.ball_radius = b.contains("ball_radius")
                         ? positive_number(b.at("ball_radius"), "bounds.ball_radius")
                         : std::numeric_limits<double>::infinity();
    be.residual = be.value_bound;
    s.bounds = be;
  }

  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  if (!s.description.empty()) doc["description"] = s.description;
  doc["dimension"] = s.dimension;
  json verts = json::array();
  for (const VectorExpr& v : s.field.vertices) {
    json row = json::array();
    for (const std::string& c : v.text()) row.push_back(c);
    verts.push_back(row);
  }
  doc["vertices"] = verts;
  doc["initial"] = vector_json(s.initial);
  doc["horizon"] = s.horizon;
  doc["step"] = s.step;
  if (s.radius) {
    if (s.radius->is_constant())
      doc["radius"] = s.radius->at(0.0);
    else
      doc["radius"] = s.radius->text();
  }
  doc["segment_width"] = s.segment_width;
  if (s.switching) {
    doc["switching"] = {{"breakpoints", s.switching->breakpoints},
                        {"indices", s.switching->indices}};
  }
  if (s.relaxed) {
    doc["relaxed"] = {{"breakpoints", s.relaxed->breakpoints},
                      {"weights", s.relaxed->weights}};
  }
  doc["epsilon"] = s.epsilon;
  doc["slices"] = s.slices;
  doc["origin_slices"] = s.origin_slices;
  doc["seed"] = s.seed;
  doc["threshold"] = s.threshold;
  if (s.t_max > 0.0) doc["t_max"] = s.t_max;
  doc["trials"] = s.trials;
  doc["probe_segments"] = s.probe_segments;
  if (!s.starts.empty()) {
    json rows = json::array();
    for (const Eigen::VectorXd& v : s.starts) rows.push_back(vector_json(v));
    doc["starts"] = rows;
  }
  if (s.bounds) {
    json b;
    b["lipschitz"] = s.bounds->lipschitz;
    b["value_bound"] = s.bounds->value_bound;
    if (std::isfinite(s.bounds->ball_radius)) b["ball_radius"] = s.bounds->ball_radius;
    doc["bounds"] = b;
  }
  return doc;
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<json> docs;

  docs.push_back({
      {"name", "counterexample"},
      {"description",
       "planar drift x' = y^2 with bang control y' in {-1,1}; the relaxed "
       "center stays at the origin inside the shrinking tube exp(-t)"},
      {"dimension", 2},
      {"vertices",
       json::array({json::array({"x2^2", "-1"}), json::array({"x2^2", "1"})})},
      {"initial", {0.0, 0.0}},
      {"horizon", 5.0},
      {"step", 1e-3},
      {"radius", "exp(-t)"},
      {"segment_width", 1.0},
      {"relaxed", {{"breakpoints", {0.0, 5.0}}, {"weights", {{0.5, 0.5}}}}},
      {"epsilon", 0.2},
      {"slices", 4},
      {"seed", 2027},
      {"threshold", 1e9},
      {"trials", 20},
  });

  docs.push_back({
      {"name", "escape-pair"},
      {"description",
       "scalar pair {x^2-1, x^2+1} from x0 = 2: every selection of either "
       "inclusion blows up in finite time"},
      {"dimension", 1},
      {"vertices", {{"x1^2-1"}, {"x1^2+1"}}},
      {"initial", {2.0}},
      {"horizon", 2.0},
      {"t_max", 2.0},
      {"step", 1e-3},
      {"seed", 2027},
      {"threshold", 1e9},
      {"trials", 20},
      {"probe_segments", 400},
  });

  docs.push_back({
      {"name", "complete-pair"},
      {"description",
       "scalar pair {-x, x} from x0 = 1: |x(t)| <= e^t, so neither inclusion "
       "escapes by t = 10 under threshold 1e9"},
      {"dimension", 1},
      {"vertices", {{"-x1"}, {"x1"}}},
      {"initial", {1.0}},
      {"horizon", 10.0},
      {"t_max", 10.0},
      {"step", 1e-3},
      {"seed", 2027},
      {"threshold", 1e9},
      {"trials", 20},
      {"probe_segments", 400},
  });

  docs.push_back({
      {"name", "linear-gronwall"},
      {"description",
       "scalar linear field {x}: reusing the reference control from a start "
       "shifted by 0.1 produces the gap 0.1*exp(t) exactly"},
      {"dimension", 1},
      {"vertices", {{"x1"}}},
      {"initial", {1.0}},
      {"horizon", 1.0},
      {"step", 1e-4},
      {"switching", {{"breakpoints", {0.0, 1.0}}, {"indices", {1}}}},
      {"epsilon", 0.1},
      {"seed", 2027},
  });

  std::vector<Scenario> out;
  out.reserve(docs.size());
  for (const json& d : docs) out.push_back(scenario_from_json(d));
  return out;
}

Scenario load_scenario(const std::string& ref) {
  const std::string prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) {
    std::string name = ref.substr(prefix.size());
    for (Scenario& s : builtin_scenarios())
      if (s.name == name) return std::move(s);
    fail("unknown builtin '" + name + "'; run list-builtins");
  }
  std::ifstream in(ref);
  if (!in) fail("cannot open scenario file '" + ref + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail("invalid JSON in '" + ref + "': " + e.what());
  }
  Scenario s = scenario_from_json(doc);
  if (s.name.empty()) s.name = std::filesystem::path(ref).stem().string();
  return s;
}

namespace {

json bounds_json(const BoundsEstimate& b, bool estimated) {
  json j;
  j["ball_radius"] = std::isfinite(b.ball_radius) ? json(b.ball_radius) : json();
  j["lipschitz"] = b.lipschitz;
  j["value_bound"] = b.value_bound;
  j["residual"] = b.residual;
  j["sample_count"] = b.sample_count;
  j["source"] = estimated ? "estimated" : "supplied";
  return j;
}

json family_json(const SelectionFamily& fam, bool estimated_bounds) {
  json j;
  j["center"] = vector_json(fam.center);
  j["delta"] = fam.delta;
  j["epsilon"] = fam.epsilon;
  j["k_integral"] = fam.k_integral;
  j["chatter_gap"] = fam.chatter_gap;
  j["slices"] = fam.slices;
  j["halvings"] = fam.halvings;
  j["switch_count"] = fam.control.intervals();
  j["span"] = {fam.t_begin, fam.t_end};
  j["bounds"] = bounds_json(fam.bounds, estimated_bounds);
  return j;
}

Radius gaps_radius(const Scenario& s) {
  return s.radius ? *s.radius : Radius::constant(s.epsilon);
}

void run_simulate(const Scenario& s, const std::filesystem::path& out, json& manifest) {
  SwitchingSignal u = s.effective_switching();
  Trajectory x = integrate_switching(s.field, u, s.initial, s.step);
  write_trajectory_csv(out / "trajectory.csv", x, &u, nullptr);
  manifest["outputs"]["trajectory"] = "trajectory.csv";
  manifest["result"] = {{"final_state", vector_json(x.states().back())},
                        {"grid_points", x.size()},
                        {"span", {x.t_begin(), x.t_end()}},
                        {"switch_count", u.intervals()}};
}

void run_relax(const Scenario& s, const std::filesystem::path& out, json& manifest) {
  RelaxedControl lam = s.effective_relaxed();
  Trajectory z = integrate_relaxed(s.field, lam, s.initial, s.step);
  write_trajectory_csv(out / "trajectory.csv", z, nullptr, &lam);
  manifest["outputs"]["trajectory"] = "trajectory.csv";
  manifest["result"] = {{"final_state", vector_json(z.states().back())},
                        {"grid_points", z.size()},
                        {"span", {z.t_begin(), z.t_end()}}};
}

void run_chatter(const Scenario& s, const std::filesystem::path& out, json& manifest) {
  RelaxedControl lam = s.effective_relaxed();
  Trajectory z = integrate_relaxed(s.field, lam, s.initial, s.step);
  ChatterPlan plan = make_chatter_plan(lam, s.slices);
  SwitchingSignal u = flatten_plan(plan);
  Trajectory y = integrate_switching(s.field, u, s.initial, s.step);

  double worst_conservation = 0.0;
  for (int j = 0; j < plan.slice_count; ++j) {
    double width = plan.slice_boundary(j + 1) - plan.slice_boundary(j);
    double sum = 0.0;
    for (double d : plan.durations[j]) sum += d;
    worst_conservation = std::max(worst_conservation, std::fabs(sum - width));
  }

  double gap_at = 0.0;
  double gap = sup_gap(z, y, &gap_at);

  write_trajectory_csv(out / "reference.csv", z, nullptr, &lam);
  write_trajectory_csv(out / "trajectory.csv", y, &u, nullptr);
  write_gaps_csv(out / "gaps.csv", z, y, gaps_radius(s));
  manifest["outputs"] = {{"trajectory", "trajectory.csv"},
                         {"reference", "reference.csv"},
                         {"gaps", "gaps.csv"}};
  manifest["result"] = {{"slices", s.slices},
                        {"sup_gap", gap},
                        {"sup_gap_time", gap_at},
                        {"switch_count", u.intervals()},
                        {"worst_slice_conservation", worst_conservation},
                        {"final_state", vector_json(y.states().back())}};
}

void run_tube(const Scenario& s, const std::filesystem::path& out, json& manifest) {
  RelaxedControl lam = s.effective_relaxed();
  Trajectory z = integrate_relaxed(s.field, lam, s.initial, s.step);
  Rng rng(s.seed);
  TubeSelectionOptions opt;
  opt.bounds = s.bounds;
  SelectionFamily fam = tube_selection(s.field, z, lam, s.epsilon, s.step, rng, opt);

  write_trajectory_csv(out / "reference.csv", z, nullptr, &lam);
  write_trajectory_csv(out / "trajectory.csv", fam.base, &fam.control, nullptr);
  write_gaps_csv(out / "gaps.csv", z, fam.base, Radius::constant(s.epsilon));
  manifest["outputs"] = {{"trajectory", "trajectory.csv"},
                         {"reference", "reference.csv"},
                         {"gaps", "gaps.csv"}};
  manifest["result"] = {{"family", family_json(fam, !s.bounds.has_value())},
                        {"sup_gap_base", sup_gap(z, fam.base)}};
}

void run_horizon(const Scenario& s, const std::filesystem::path& out, json& manifest,
                 const RunOptions&) {
  if (!s.radius) fail("'horizon' needs a 'radius' entry in the scenario");
  RelaxedControl lam = s.effective_relaxed();
  double scale = std::max(1.0, s.horizon);
  if (std::fabs(lam.t_begin()) > 1e-9 * scale ||
      std::fabs(lam.t_end() - s.horizon) > 1e-9 * scale)
    fail("relaxed control must cover [0, horizon] for 'horizon'");

  Trajectory z = integrate_relaxed(s.field, lam, s.initial, s.step);
  SegmentPlan plan = plan_segments(*s.radius, s.horizon, s.segment_width);
  Rng rng(s.seed);
  TubeSelectionOptions opt;
  opt.bounds = s.bounds;
  HorizonResult res = horizon_approximate(s.field, z, lam, *s.radius, plan, s.step, rng, opt);

  write_trajectory_csv(out / "reference.csv", z, nullptr, &lam);
  write_trajectory_csv(out / "trajectory.csv", res.trajectory, nullptr, nullptr);
  write_gaps_csv(out / "gaps.csv", z, res.trajectory, *s.radius);
  manifest["outputs"] = {{"trajectory", "trajectory.csv"},
                         {"reference", "reference.csv"},
                         {"gaps", "gaps.csv"}};

  json segs = json::array();
  for (const SegmentReport& r : res.segments) {
    json e;
    e["k"] = r.k;
    e["span"] = {r.t_begin, r.t_end};
    e["epsilon"] = r.epsilon;
    e["delta"] = r.delta;
    e["cap"] = std::isfinite(r.cap) ? json(r.cap) : json();
    e["slices"] = r.slices;
    e["chatter_gap"] = r.chatter_gap;
    e["achieved_gap"] = r.achieved_gap;
    e["anchor_gap"] = r.anchor_gap;
    e["anchor_in_ball"] = r.anchor_in_ball;
    e["halvings"] = r.halvings;
    segs.push_back(e);
  }
  manifest["result"] = {{"xi", vector_json(s.initial)},
                        {"eta0", vector_json(res.eta0)},
                        {"initial_gap", res.initial_gap},
                        {"r0", s.radius->at(0.0)},
                        {"plan", {{"times", plan.times}, {"radii", plan.radii}}},
                        {"segments", segs},
                        {"worst_gap", res.worst_gap},
                        {"worst_gap_time", res.worst_gap_time},
                        {"worst_gap_ratio", res.worst_gap_ratio},
                        {"tolerance", res.tolerance}};
}

void run_origin_check(const Scenario& s, const std::filesystem::path& out, json& manifest) {
  // Probes the quantitative impossibility of staying on the relaxed center:
  // chatter the uniform weights on [0, 1] from the scenario start and report
  // how far the drift coordinate x1 ends up above zero.
  int m = s.field.vertex_count();
  RelaxedControl sym;
  sym.breakpoints = {0.0, 1.0};
  sym.weights = {std::vector<double>(m, 1.0 / m)};

  json runs = json::array();
  bool first_written = false;
  for (int n : s.origin_slices) {
    SwitchingSignal u = chatter_control(sym, n);
    Trajectory y = integrate_switching(s.field, u, s.initial, s.step);
    double x1 = y.states().back()(0);
    double closed_form = 1.0 / (12.0 * n * n);
    json e;
    e["slices"] = n;
    e["x1_end"] = x1;
    e["closed_form"] = closed_form;
    e["abs_error"] = std::fabs(x1 - closed_form);
    e["positive"] = x1 > 0.0;
    if (x1 > 0.0 && x1 < 1.0) {
      // x1 is nondecreasing along the run, so once exp(-t) sinks below
      // x1(1)^2 the squared-radius envelope is violated for good.
      double vt = -2.0 * std::log(x1);
      e["violation_time"] = vt;
      e["within_horizon"] = vt <= s.horizon;
    } else {
      e["violation_time"] = json();
      e["within_horizon"] = json();
    }
    runs.push_back(e);
    if (!first_written) {
      write_trajectory_csv(out / "trajectory.csv", y, &u, nullptr);
      manifest["outputs"]["trajectory"] = "trajectory.csv";
      first_written = true;
    }
  }
  manifest["result"] = {{"interval", {0.0, 1.0}},
                        {"weights", sym.weights[0]},
                        {"runs", runs}};
}

json escape_column_json(const std::vector<EscapeReport>& col) {
  json times = json::array();
  int escaped = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const EscapeReport& r : col) {
    if (r.escaped) {
      ++escaped;
      double t = *r.escape_time;
      times.push_back(t);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    } else {
      times.push_back(json());
    }
  }
  json j;
  j["escaped_count"] = escaped;
  j["escape_times"] = times;
  if (escaped > 0) {
    j["first_escape"] = lo;
    j["last_escape"] = hi;
    j["spread"] = hi - lo;
  }
  return j;
}

void run_completeness(const Scenario& s, const std::filesystem::path& out, json& manifest,
                      const RunOptions& opt) {
  CompletenessReport rep =
      completeness_probe(s.field, s.effective_starts(), s.effective_t_max(), s.trials, s.step,
                         s.threshold, Rng(s.seed), s.probe_segments, opt.jobs);
  json entries = json::array();
  for (const CompletenessEntry& e : rep.entries) {
    json je;
    je["start"] = vector_json(e.start);
    je["switching"] = escape_column_json(e.switching);
    je["switching"]["any_escape"] = e.switching_escaped;
    je["relaxed"] = escape_column_json(e.relaxed);
    je["relaxed"]["any_escape"] = e.relaxed_escaped;
    je["disagreement"] = e.disagreement;
    entries.push_back(je);
  }
  manifest["result"] = {{"entries", entries},
                        {"any_disagreement", rep.any_disagreement},
                        {"trials", rep.trials},
                        {"t_max", rep.t_max},
                        {"threshold", rep.threshold},
                        {"probe_segments", rep.segments}};
  (void)out;
}

}  // namespace

json run_scenario(const Scenario& original, const std::string& subcommand,
                  const std::filesystem::path& out_dir, const RunOptions& options) {
  Scenario s = original;
  if (options.seed) s.seed = *options.seed;
  if (options.step) s.step = *options.step;
  if (options.epsilon) s.epsilon = *options.epsilon;
  if (options.slices) s.slices = *options.slices;
  if (options.trials) s.trials = *options.trials;

  std::filesystem::create_directories(out_dir);

  json manifest;
  manifest["format"] = "tubeflow.manifest.v1";
  manifest["subcommand"] = subcommand;
  manifest["scenario"] = scenario_to_json(s);
  manifest["field_hash"] = field_hash(s.field);
  manifest["outputs"] = json::object();

  if (subcommand == "simulate") {
    run_simulate(s, out_dir, manifest);
  } else if (subcommand == "relax") {
    run_relax(s, out_dir, manifest);
  } else if (subcommand == "chatter") {
    run_chatter(s, out_dir, manifest);
  } else if (subcommand == "tube") {
    run_tube(s, out_dir, manifest);
  } else if (subcommand == "horizon") {
    run_horizon(s, out_dir, manifest, options);
  } else if (subcommand == "origin-check") {
    run_origin_check(s, out_dir, manifest);
  } else if (subcommand == "completeness") {
    run_completeness(s, out_dir, manifest, options);
  } else {
    fail("unknown subcommand '" + subcommand + "'");
  }

  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace tubeflow
