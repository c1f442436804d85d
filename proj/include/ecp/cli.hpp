#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ecp {

/// Effective configuration of one CLI invocation. A JSON config file may
/// supply any flag; command-line flags override file values. Stochastic
/// commands require an explicit seed; there is no wall-clock default.
struct RunConfig {
  std::string command;
  std::string model_spec;
  std::string class_spec;
  std::size_t n = 0;
  std::size_t B = 0;
  std::size_t reps = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 1e-3;
  int dim = 2;
  int max_depth = 12;
  int res = 4;
  std::string input;
  std::string output;           // empty = stdout
  std::string format = "json";  // csv | json
  std::string function_name;    // variation: named analytic function
  std::string mode;             // ibp-check: general|vanishing, variation: exact|refine
  std::string centering = "closed_form";  // process/gof/mc-study: closed_form | mc
  std::size_t mc_n = 0;                   // Monte-Carlo centering size
};

nlohmann::json config_to_json(const RunConfig& cfg);

/// Runs one configured command, writing the artifact to cfg.output (or
/// stdout). Returns 0 on success, 2 when a computation completed with a
/// failed internal identity check or a non-finite result.
int dispatch(const RunConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace ecp
