#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubeflow/setvalued.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// One self-contained run description: the field, the initial state, the
// controls, and every knob the pipelines consume.  Parsed from a JSON
// document; see README for the schema.
struct Scenario {
  std::string name;
  std::string description;
  int dimension = 0;
  std::vector<std::vector<std::string>> vertex_sources;
  PolytopicField field;
  Eigen::VectorXd initial;
  double horizon = 1.0;
  double step = 1e-3;
  std::optional<Radius> radius;
  double segment_width = 1.0;
  std::optional<SwitchingSignal> switching;
  std::optional<RelaxedControl> relaxed;
  double epsilon = 0.1;
  int slices = 4;
  std::vector<int> origin_slices = {1, 4, 16};
  std::uint64_t seed = 0;
  double threshold = 1e9;
  double t_max = 0.0;  // 0: inherit horizon
  int trials = 20;
  int probe_segments = 400;
  std::vector<Eigen::VectorXd> starts;  // empty: {initial}
  std::optional<BoundsEstimate> bounds;

  double effective_t_max() const { return t_max > 0.0 ? t_max : horizon; }
  std::vector<Eigen::VectorXd> effective_starts() const {
    return starts.empty() ? std::vector<Eigen::VectorXd>{initial} : starts;
  }
  SwitchingSignal effective_switching() const;  // default: vertex 1 throughout
  RelaxedControl effective_relaxed() const;     // default: uniform weights
};

// Strict parse: unknown keys are rejected, every value is validated.
Scenario scenario_from_json(const nlohmann::json& doc);

// The scenario with all defaults materialized; embedding this in a manifest
// makes the run replayable.
nlohmann::json scenario_to_json(const Scenario& s);

// `ref` is either a filesystem path to a JSON document or `builtin:<name>`.
Scenario load_scenario(const std::string& ref);

std::vector<Scenario> builtin_scenarios();

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  std::optional<double> epsilon;
  std::optional<int> slices;
  std::optional<int> trials;
  int jobs = 1;
};

// Executes one pipeline, writes its artifacts (CSV files + manifest.json)
// into out_dir, and returns the manifest.  Subcommands: simulate, relax,
// chatter, tube, horizon, origin-check, completeness.
nlohmann::json run_scenario(const Scenario& s, const std::string& subcommand,
                            const std::filesystem::path& out_dir,
                            const RunOptions& options = {});

}  // namespace tubeflow
