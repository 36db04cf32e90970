#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "csal/learner.hpp"
#include "csal/problems.hpp"

namespace csal {

using ClassifierFn = std::function<int(std::span<const double>)>;

struct RiskEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo excess risk E[f(X; g(X)) - min_y f(X; y)] under X ~ P_X,
// using the problem's exact expected costs.
RiskEstimate excess_risk(const ClassifierFn& g, const Problem& p,
                         std::size_t num_eval, std::mt19937_64& rng);

// Classification excess risk E[max_y P(Y=y|X) - P(Y=g(X)|X)].
RiskEstimate classification_excess_risk(const ClassifierFn& g,
                                        const LabelProblem& lp,
                                        std::size_t num_eval,
                                        std::mt19937_64& rng);

// Histogram plug-in on the fixed-depth partition: label of an empty cell
// is 1, otherwise the smallest label minimizing the cell's average cost.
struct PassiveClassifier {
  int dim = 1;
  std::uint32_t depth = 0;
  std::unordered_map<std::uint64_t, int> cell_labels;  // keyed by index
  int operator()(std::span<const double> x) const;
};

// h* = round(log(n) / ((2 alpha + d) log(1/rho))).
std::uint32_t passive_depth(std::uint64_t n, double alpha,
                            const PartitionGeometry& geom);

// Draw n samples (X, full cost vector) under the problem's noise model and
// build the plug-in classifier at depth h*.
PassiveClassifier passive_baseline(std::uint64_t n, const Problem& p,
                                   std::mt19937_64& rng);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t points_used = 0;
  std::size_t points_dropped = 0;  // non-positive risks
};

// OLS of log(risk) on log(budget). Non-positive risks are dropped (counted
// in points_dropped); fewer than 3 surviving points throws.
RateFit rate_fit(std::span<const double> budgets,
                 std::span<const double> risks);

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resamples = 0;
};

// Percentile CI of the slope under replicate-level resampling: per budget,
// replicate risks are resampled with replacement, means recomputed, slope
// refitted. Deterministic given seed.
BootstrapCI bootstrap_slope_ci(const std::vector<double>& budgets,
                               const std::vector<std::vector<double>>& risks,
                               std::size_t resamples, std::uint64_t seed);

// ---- replicate orchestration -------------------------------------------

struct ReplicateRow {
  std::uint64_t budget = 0;
  std::uint32_t replicate = 0;
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  std::uint32_t max_depth = 0;
  double classified_mass = 0.0;
  std::uint64_t queries_total = 0;
  std::vector<std::uint64_t> queries_per_label;
};

struct SweepOptions {
  std::vector<std::uint64_t> budgets;
  std::uint32_t replicates = 1;
  std::size_t num_eval = 100000;
  std::uint64_t base_seed = 0;
  int threads = 1;
  std::size_t bootstrap = 1000;
};

struct BudgetSummary {
  std::uint64_t budget = 0;
  double mean_risk = 0.0;
  double se = 0.0;
  std::uint32_t replicates = 0;
  std::uint32_t max_depth = 0;               // max over replicates
  double classified_mass = 0.0;              // mean over replicates
  std::vector<double> depth_active_counts;   // mean over replicates
  double tau0 = 0.0;        // (log(2 n^3 M)/n)^(alpha beta/(2 alpha+d-alpha beta))
  std::string regime;       // "tau>=tau0" or "tau<tau0"
};

struct SweepResult {
  std::vector<ReplicateRow> active_rows;
  std::vector<ReplicateRow> passive_rows;
  std::vector<BudgetSummary> active_summary;
  std::vector<BudgetSummary> passive_summary;
  RateFit active_fit;
  RateFit passive_fit;
  BootstrapCI active_ci;
  BootstrapCI passive_ci;
};

// Active runs (learner) and passive baselines over budgets x replicates.
// Embarrassingly parallel over tasks; task seeds are base_seed + task index
// in a fixed enumeration, so results are independent of thread scheduling.
SweepResult run_sweep(const Problem& p, const LearnerParams& base,
                      const SweepOptions& opt);

// One active replicate (learner run + risk + classified mass).
ReplicateRow active_replicate(const Problem& p, const LearnerParams& params,
                              std::uint32_t replicate, std::uint64_t seed,
                              std::size_t num_eval);

// One passive replicate.
ReplicateRow passive_replicate(const Problem& p, std::uint64_t budget,
                               double alpha, const PartitionGeometry& geom,
                               std::uint32_t replicate, std::uint64_t seed,
                               std::size_t num_eval);

// P_X-mass of the classified region: exact via box_mass when the problem
// has one, otherwise a 4096-draw Monte-Carlo membership estimate on a
// derived substream.
double classified_mass(const LearnerState& s, const Problem& p,
                       std::uint64_t seed);

}  // namespace csal
