// Command line front end: loads a scenario, runs one pipeline, writes the
// artifact directory. Errors leave a machine readable JSON object on stderr.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubeflow/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out;
  tubeflow::RunOptions options;
  std::optional<long long> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_jobs) {
  cmd->add_option("--scenario", args.scenario,
                  "scenario JSON file, or builtin:<name> (see list-builtins)")
      ->required();
  cmd->add_option("--out", args.out, "output directory for CSVs and manifest.json")
      ->required();
  cmd->add_option("--seed", args.seed, "override the scenario seed");
  cmd->add_option("--step", args.options.step, "override the integration step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epsilon", args.options.epsilon, "override the tube epsilon")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--slices", args.options.slices, "override the chatter slice count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trials", args.options.trials, "override the probe trial count")
      ->check(CLI::PositiveNumber);
  if (with_jobs)
    cmd->add_option("--jobs", args.options.jobs, "worker threads for probe batches")
        ->check(CLI::PositiveNumber);
}

int run(const std::string& subcommand, CommonArgs& args) {
  if (args.seed) args.options.seed = static_cast<std::uint64_t>(*args.seed);
  tubeflow::Scenario s = tubeflow::load_scenario(args.scenario);
  nlohmann::json manifest = tubeflow::run_scenario(s, subcommand, args.out, args.options);
  nlohmann::json brief;
  brief["subcommand"] = subcommand;
  brief["scenario"] = manifest["scenario"]["name"];
  brief["out"] = args.out;
  if (manifest.contains("result")) brief["result"] = manifest["result"];
  std::fputs((brief.dump(2) + "\n").c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tubeflow: set valued dynamics, chattering, and tube tracking"};
  app.require_subcommand(1);

  const char* names[] = {"simulate",   "relax",        "chatter", "tube",
                         "horizon",    "origin-check", "completeness"};
  const char* blurbs[] = {
      "integrate one switching selection",
      "integrate the relaxed convex combination",
      "approximate the relaxed run by time sliced switching",
      "build a verified selection family around the relaxed run",
      "glue backward segments into a full horizon tube tracker",
      "chatter the symmetric weights on [0,1] and report the drift",
      "compare random switching and relaxed runs for finite escape"};

  CommonArgs args[7];
  static_assert(sizeof(names) / sizeof(names[0]) == 7);
  for (int i = 0; i < 7; ++i) {
    CLI::App* cmd = app.add_subcommand(names[i], blurbs[i]);
    add_common(cmd, args[i], std::string(names[i]) == "completeness");
  }
  CLI::App* list = app.add_subcommand("list-builtins", "print the built in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      nlohmann::json rows = nlohmann::json::array();
      for (const tubeflow::Scenario& s : tubeflow::builtin_scenarios())
        rows.push_back({{"name", s.name},
                        {"description", s.description},
                        {"dimension", s.dimension},
                        {"vertices", s.field.vertex_count()}});
      std::fputs((rows.dump(2) + "\n").c_str(), stdout);
      return 0;
    }
    for (int i = 0; i < 7; ++i)
      if (app.get_subcommands().front()->get_name() == names[i]) return run(names[i], args[i]);
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::fputs((err.dump() + "\n").c_str(), stderr);
    return 1;
  }
}
