#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csal/learner.hpp"
#include "csal/problems.hpp"

namespace csal {

// Parsed experiment configuration. File format: flat key-value lines in
// typed sections ([problem], [learner], [evaluation], [run]); '#' comments.
struct ExperimentConfig {
  // [problem] -- family plus family-specific keys, validated on build
  std::string family;
  std::map<std::string, std::string> problem_params;

  // [learner]
  std::optional<std::uint64_t> budget;   // single-run budget n
  std::vector<std::uint64_t> budgets;    // sweep budgets
  NoiseModel noise = NoiseModel::kBernoulli;
  std::optional<double> alpha;  // override of the problem's declared traits
  std::optional<double> holder_L;
  std::optional<double> rho, nu1, nu2;  // geometry overrides

  // [evaluation]
  std::size_t num_eval = 100000;
  std::uint32_t replicates = 1;
  std::size_t bootstrap = 1000;

  // [run]
  std::optional<std::uint64_t> seed;  // mandatory before running (flag or file)
  int threads = 1;
  std::string out_dir = "out";
};

// Parse and validate a config file. Unknown sections or keys, malformed
// values, or inconsistent fields (e.g. non-increasing budgets) throw
// ConfigError with a message naming the offending field.
ExperimentConfig load_config(const std::string& path);

// Instantiate the configured problem family (with the configured noise
// model). Throws ConfigError for unknown families/keys and ProblemError
// for structurally infeasible parameters.
Problem build_problem(const ExperimentConfig& cfg);

// Learner parameters for one run: declared traits unless overridden.
LearnerParams make_learner_params(const ExperimentConfig& cfg,
                                  const Problem& p, std::uint64_t budget);

}  // namespace csal
