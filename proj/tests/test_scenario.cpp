#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tubeflow/errors.hpp"
#include "tubeflow/io.hpp"
#include "tubeflow/scenario.hpp"

using namespace tubeflow;
using nlohmann::json;

namespace {

json minimal_doc() {
  return {
      {"name", "toy"},
      {"dimension", 1},
      {"vertices", json::array({json::array({"-x1"})})},
      {"initial", {1.0}},
  };
}

std::filesystem::path fresh_dir(const std::string& tag) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("tubeflow_test_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario parsing applies defaults") {
  Scenario s = scenario_from_json(minimal_doc());
  CHECK(s.name == "toy");
  CHECK(s.dimension == 1);
  CHECK(s.horizon == 1.0);
  CHECK(s.step == 1e-3);
  CHECK(s.epsilon == 0.1);
  CHECK(s.slices == 4);
  CHECK(s.seed == 0);
  CHECK(s.trials == 20);
  CHECK(s.probe_segments == 400);
  CHECK(!s.radius.has_value());
  CHECK(!s.switching.has_value());
  CHECK(!s.relaxed.has_value());
  CHECK(s.effective_t_max() == 1.0);  // falls back to the horizon

  // Defaults materialize into usable controls.
  SwitchingSignal u = s.effective_switching();
  CHECK(u.breakpoints == std::vector<double>{0.0, 1.0});
  CHECK(u.indices == std::vector<int>{1});
  RelaxedControl lam = s.effective_relaxed();
  CHECK(lam.weights == std::vector<std::vector<double>>{{1.0}});
  REQUIRE(s.effective_starts().size() == 1);
  CHECK(s.effective_starts()[0] == s.initial);
}

TEST_CASE("scenario parsing rejects malformed documents") {
  auto expect_reject = [](json doc) {
    CHECK_THROWS_AS(scenario_from_json(doc), ScenarioError);
  };

  {  // unknown top-level key
    json d = minimal_doc();
    d["surprise"] = 1;
    expect_reject(d);
  }
  {  // unknown key inside a control
    json d = minimal_doc();
    d["switching"] = {{"breakpoints", {0.0, 1.0}}, {"indices", {1}}, {"x", 2}};
    expect_reject(d);
  }
  {  // missing required field
    json d = minimal_doc();
    d.erase("initial");
    expect_reject(d);
  }
  {  // dimension mismatch in initial
    json d = minimal_doc();
    d["initial"] = {1.0, 2.0};
    expect_reject(d);
  }
  {  // dimension mismatch in a vertex
    json d = minimal_doc();
    d["vertices"] = json::array({json::array({"-x1", "x1"})});
    expect_reject(d);
  }
  {  // bad expression
    json d = minimal_doc();
    d["vertices"] = json::array({json::array({"x2"})});
    expect_reject(d);
  }
  {  // vertex index out of range in switching
    json d = minimal_doc();
    d["switching"] = {{"breakpoints", {0.0, 1.0}}, {"indices", {2}}};
    expect_reject(d);
  }
  {  // weights do not sum to one
    json d = minimal_doc();
    d["relaxed"] = {{"breakpoints", {0.0, 1.0}}, {"weights", {{0.4}}}};
    expect_reject(d);
  }
  {  // negative step
    json d = minimal_doc();
    d["step"] = -1e-3;
    expect_reject(d);
  }
  {  // zero slices
    json d = minimal_doc();
    d["slices"] = 0;
    expect_reject(d);
  }
  {  // negative seed
    json d = minimal_doc();
    d["seed"] = -1;
    expect_reject(d);
  }
  {  // radius referencing state
    json d = minimal_doc();
    d["radius"] = "x1";
    expect_reject(d);
  }
  {  // bounds missing a required piece
    json d = minimal_doc();
    d["bounds"] = {{"lipschitz", 1.0}};
    expect_reject(d);
  }
  expect_reject(json::array());
}

TEST_CASE("scenario json round trip is stable") {
  for (const Scenario& s : builtin_scenarios()) {
    json a = scenario_to_json(s);
    Scenario reparsed = scenario_from_json(a);
    json b = scenario_to_json(reparsed);
    CHECK(a == b);
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("builtin lookup and file loading") {
  Scenario s = load_scenario("builtin:counterexample");
  CHECK(s.name == "counterexample");
  CHECK(s.dimension == 2);
  CHECK(s.horizon == 5.0);
  CHECK(s.radius.has_value());
  CHECK(s.radius->text() == "exp(-t)");
  CHECK(s.seed == 2027);

  CHECK_THROWS_AS(load_scenario("builtin:nonsense"), ScenarioError);
  CHECK_THROWS_AS(load_scenario("/no/such/file.json"), ScenarioError);

  // Loading from a file; a missing name falls back to the stem.
  std::filesystem::path p =
      std::filesystem::temp_directory_path() / "tubeflow_scn.json";
  json d = minimal_doc();
  d.erase("name");
  std::ofstream(p) << d.dump();
  Scenario file = load_scenario(p.string());
  CHECK(file.name == "tubeflow_scn");
  CHECK(file.dimension == 1);

  std::ofstream(p) << "{ not json";
  CHECK_THROWS_AS(load_scenario(p.string()), ScenarioError);
  std::filesystem::remove(p);
}

TEST_CASE("field hash distinguishes fields and ignores nothing relevant") {
  Scenario a = load_scenario("builtin:counterexample");
  Scenario b = load_scenario("builtin:escape-pair");
  std::string ha = field_hash(a.field);
  std::string hb = field_hash(b.field);
  CHECK(ha != hb);
  CHECK(ha.rfind("fnv1a:", 0) == 0);
  CHECK(field_hash(a.field) == ha);  // stable
}

TEST_CASE("run_scenario writes artifacts and a replayable manifest") {
  Scenario s = load_scenario("builtin:counterexample");
  std::filesystem::path out = fresh_dir("chatter");
  json manifest = run_scenario(s, "chatter", out);

  CHECK(manifest["format"] == "tubeflow.manifest.v1");
  CHECK(manifest["subcommand"] == "chatter");
  CHECK(std::filesystem::exists(out / "manifest.json"));
  CHECK(std::filesystem::exists(out / "trajectory.csv"));
  CHECK(std::filesystem::exists(out / "reference.csv"));
  CHECK(std::filesystem::exists(out / "gaps.csv"));

  // The emitted manifest is exactly the returned document.
  json from_disk = json::parse(slurp(out / "manifest.json"));
  CHECK(from_disk == manifest);

  // Replay: load the embedded scenario and rerun; everything byte-compares.
  Scenario embedded = scenario_from_json(manifest["scenario"]);
  std::filesystem::path out2 = fresh_dir("chatter_replay");
  json manifest2 = run_scenario(embedded, "chatter", out2);
  CHECK(manifest2 == manifest);
  CHECK(slurp(out2 / "manifest.json") == slurp(out / "manifest.json"));
  CHECK(slurp(out2 / "trajectory.csv") == slurp(out / "trajectory.csv"));
  CHECK(slurp(out2 / "gaps.csv") == slurp(out / "gaps.csv"));

  std::filesystem::remove_all(out);
  std::filesystem::remove_all(out2);
}

TEST_CASE("run options override the scenario before embedding") {
  Scenario s = load_scenario("builtin:counterexample");
  RunOptions opt;
  opt.slices = 8;
  opt.seed = 99;
  std::filesystem::path out = fresh_dir("override");
  json manifest = run_scenario(s, "chatter", out, opt);
  CHECK(manifest["scenario"]["slices"] == 8);
  CHECK(manifest["scenario"]["seed"] == 99);
  CHECK(manifest["result"]["slices"] == 8);

  // Replaying the embedded scenario with no overrides reproduces the run.
  Scenario embedded = scenario_from_json(manifest["scenario"]);
  std::filesystem::path out2 = fresh_dir("override_replay");
  json manifest2 = run_scenario(embedded, "chatter", out2);
  CHECK(manifest2 == manifest);

  std::filesystem::remove_all(out);
  std::filesystem::remove_all(out2);
}

TEST_CASE("simulate and relax write the expected csv headers") {
  Scenario s = load_scenario("builtin:counterexample");
  std::filesystem::path out = fresh_dir("sim");
  run_scenario(s, "simulate", out);
  std::string head = slurp(out / "trajectory.csv").substr(0, 11);
  CHECK(head == "t,x1,x2,u\n0");

  std::filesystem::path out2 = fresh_dir("relax");
  run_scenario(s, "relax", out2);
  std::string rhead = slurp(out2 / "trajectory.csv");
  CHECK(rhead.rfind("t,x1,x2,lambda_1,lambda_2\n", 0) == 0);

  std::filesystem::remove_all(out);
  std::filesystem::remove_all(out2);
}

TEST_CASE("zero field simulates to a constant trajectory") {
  json d = {
      {"name", "still"},
      {"dimension", 2},
      {"vertices", json::array({json::array({"0", "0"})})},
      {"initial", {1.0, -2.0}},
      {"horizon", 2.0},
  };
  Scenario s = scenario_from_json(d);
  std::filesystem::path out = fresh_dir("zero");
  json manifest = run_scenario(s, "simulate", out);
  CHECK(manifest["result"]["final_state"] == json({1.0, -2.0}));

  // Every CSV row repeats the initial state.
  std::istringstream rows(slurp(out / "trajectory.csv"));
  std::string line;
  std::getline(rows, line);  // header
  int count = 0;
  while (std::getline(rows, line)) {
    CHECK(line.substr(line.find(',')) == ",1,-2,1");
    ++count;
  }
  CHECK(count == 2001);
  std::filesystem::remove_all(out);
}

TEST_CASE("horizon subcommand needs a radius") {
  Scenario s = load_scenario("builtin:complete-pair");
  std::filesystem::path out = fresh_dir("noradius");
  CHECK_THROWS_AS(run_scenario(s, "horizon", out), ScenarioError);
  std::filesystem::remove_all(out);
}

TEST_CASE("unknown subcommand is rejected") {
  Scenario s = load_scenario("builtin:complete-pair");
  std::filesystem::path out = fresh_dir("unknown");
  CHECK_THROWS_AS(run_scenario(s, "frobnicate", out), ScenarioError);
  std::filesystem::remove_all(out);
}

TEST_CASE("completeness manifest summarizes both columns") {
  Scenario s = load_scenario("builtin:escape-pair");
  RunOptions opt;
  opt.trials = 5;
  std::filesystem::path out = fresh_dir("probe");
  json manifest = run_scenario(s, "completeness", out, opt);
  const json& entry = manifest["result"]["entries"][0];
  CHECK(entry["switching"]["escaped_count"] == 5);
  CHECK(entry["relaxed"]["escaped_count"] == 5);
  CHECK(entry["switching"]["escape_times"].size() == 5);
  CHECK(entry["disagreement"] == false);
  CHECK(manifest["result"]["any_disagreement"] == false);
  double spread = entry["switching"]["spread"].get<double>();
  CHECK(spread >= 0.0);
  CHECK(spread <= 0.05);
  std::filesystem::remove_all(out);
}
