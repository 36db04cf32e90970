#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "csal/confidence.hpp"
#include "csal/partition.hpp"
#include "csal/problems.hpp"

namespace csal {

struct LearnerParams {
  std::uint64_t budget = 0;  // n
  double alpha = 1.0;
  double holder_L = 1.0;
  PartitionGeometry geom;
};

// params taken from the problem's declared traits and the standard geometry.
LearnerParams default_learner_params(const Problem& p, std::uint64_t budget);

// One unclassified cell: box, cost statistics, surviving candidate labels
// (sorted ascending, never empty).
struct ActiveCell {
  Cell cell;
  ConfidenceRecord record;
  std::vector<int> candidates;
};

struct ClassifiedCell {
  Cell cell;
  int label = 1;
  ConfidenceRecord record;
};

enum class StepAction { kQuery, kRefine, kClassifyCell };

const char* to_string(StepAction a);

// Per-step trace record: t counts all steps, used counts oracle
// interactions (queries). `queried` lists the labels queried this step.
struct StepRecord {
  std::uint64_t t = 0;
  std::uint64_t used = 0;
  StepAction action = StepAction::kQuery;
  std::uint32_t depth = 0;
  std::uint64_t index = 1;
  std::size_t unclassified = 0;
  std::size_t classified = 0;
  std::uint32_t max_depth = 0;
  std::vector<int> queried;
};

// Selection order over unclassified cells: widest uncertainty gap first,
// ties broken by (depth, index) ascending.
struct SelectionKey {
  double gap = kInf;
  CellKey key;
};
struct SelectionOrder {
  bool operator()(const SelectionKey& a, const SelectionKey& b) const {
    if (a.gap != b.gap) return a.gap > b.gap;
    return a.key < b.key;
  }
};

struct LearnerState {
  BoundParams params;
  std::map<CellKey, ActiveCell> active;          // X_u payload
  std::set<SelectionKey, SelectionOrder> queue;  // X_u selection index
  std::vector<ClassifiedCell> classified;        // X_c, in classification order
  std::uint64_t used = 0;   // oracle interactions so far
  std::uint64_t steps = 0;  // t
  std::uint64_t query_steps = 0;
  std::uint64_t refine_steps = 0;
  std::uint32_t max_depth = 0;
  bool depth_cap_hit = false;
  std::vector<std::uint64_t> depth_active_counts;  // cells ever active per depth
  std::vector<std::uint64_t> label_query_counts;   // per label, index y-1
};

// gap I = min over candidates of upper - min over candidates of lower;
// +infinity for an untouched record.
double uncertainty(const ActiveCell& c);

// Root-only initial state with every label a candidate everywhere.
LearnerState init_state(const BoundParams& p);

// State over an arbitrary leaf set (the leaves must tile [0,1]^d); used by
// tests and resumable runs.
LearnerState make_state(std::vector<ActiveCell> cells, const BoundParams& p);

// The cell the next step will act on. Precondition: active non-empty.
const ActiveCell& select(const LearnerState& s);

// Refinement trigger: at least one within-cell sample and
// v_bound(count) <= 2 * b_h(depth).
bool should_refine(const ActiveCell& c, const BoundParams& p);

// Drop candidates whose lower bound exceeds the smallest upper bound.
// Never empties: the argmin-upper label (smallest on ties) is always kept.
void eliminate(ActiveCell& c);

using StepObserver = std::function<void(const LearnerState&, const StepRecord&)>;

// One iteration: select; either split the cell (no budget) or query the
// oracle once at the cell center for all candidates (budget 1), update
// bounds, eliminate, and classify the cell when one candidate remains.
StepRecord step(LearnerState& s, const Problem& problem, std::mt19937_64& rng);

// Loop step() until the budget is exhausted, no unclassified cell remains,
// or the depth cap trips (recorded in state.depth_cap_hit; the state stays
// usable). Oracle contract violations propagate.
void run_steps(LearnerState& s, const Problem& problem, std::mt19937_64& rng,
               const StepObserver& observer = {});

// Total classifier over the final leaves: on the leaf containing x, the
// classified label, or the candidate with smallest upper bound (smallest
// label on ties; an untouched leaf yields its smallest candidate).
struct TreeClassifier {
  int dim = 1;
  std::uint32_t max_depth = 0;
  std::map<CellKey, int> leaf_labels;
  int operator()(std::span<const double> x) const;
};

int classify(std::span<const double> x, const LearnerState& s);
TreeClassifier extract_classifier(const LearnerState& s);

struct RunResult {
  LearnerState state;
  TreeClassifier classifier;
};

RunResult run(const Problem& problem, const LearnerParams& params,
              std::uint64_t seed, const StepObserver& observer = {});

}  // namespace csal
