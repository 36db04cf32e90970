#include "csal/learner.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_set>

#include "csal/errors.hpp"

namespace csal {

LearnerParams default_learner_params(const Problem& p, std::uint64_t budget) {
  LearnerParams lp;
  lp.budget = budget;
  lp.alpha = p.traits.alpha;
  lp.holder_L = p.traits.holder_L;
  lp.geom = standard_geometry(p.dim);
  return lp;
}

const char* to_string(StepAction a) {
  switch (a) {
    case StepAction::kQuery: return "query";
    case StepAction::kRefine: return "refine";
    case StepAction::kClassifyCell: return "classify-cell";
  }
  return "?";
}

double uncertainty(const ActiveCell& c) {
  double min_up = kInf, min_lo = kInf;
  for (int y : c.candidates) {
    const LabelBound& lb = c.record.labels[static_cast<std::size_t>(y - 1)];
    min_up = std::min(min_up, lb.upper);
    min_lo = std::min(min_lo, lb.lower);
  }
  return min_up - min_lo;  // +inf - (-inf) = +inf for untouched records
}

namespace {

void note_active(LearnerState& s, std::uint32_t depth) {
  if (s.depth_active_counts.size() <= depth)
    s.depth_active_counts.resize(depth + 1, 0);
  s.depth_active_counts[depth] += 1;
  s.max_depth = std::max(s.max_depth, depth);
}

void insert_active(LearnerState& s, ActiveCell cell) {
  CellKey k = key_of(cell.cell);
  note_active(s, k.depth);
  s.queue.insert({uncertainty(cell), k});
  s.active.emplace(k, std::move(cell));
}

}  // namespace

LearnerState init_state(const BoundParams& p) {
  LearnerState s;
  s.params = p;
  s.label_query_counts.assign(static_cast<std::size_t>(p.num_labels), 0);
  ActiveCell root;
  root.cell = root_cell(p.geom.dim);
  root.record = make_record(p.num_labels);
  root.candidates.resize(static_cast<std::size_t>(p.num_labels));
  for (int y = 1; y <= p.num_labels; ++y)
    root.candidates[static_cast<std::size_t>(y - 1)] = y;
  insert_active(s, std::move(root));
  return s;
}

LearnerState make_state(std::vector<ActiveCell> cells, const BoundParams& p) {
  if (cells.empty())
    throw std::invalid_argument("make_state: need at least one cell");
  LearnerState s;
  s.params = p;
  s.label_query_counts.assign(static_cast<std::size_t>(p.num_labels), 0);
  for (auto& c : cells) {
    if (c.candidates.empty())
      throw std::invalid_argument("make_state: empty candidate set");
    if (c.cell.dim() != p.geom.dim)
      throw std::invalid_argument("make_state: dimension mismatch");
    insert_active(s, std::move(c));
  }
  return s;
}

const ActiveCell& select(const LearnerState& s) {
  assert(!s.queue.empty());
  return s.active.at(s.queue.begin()->key);
}

bool should_refine(const ActiveCell& c, const BoundParams& p) {
  if (c.record.count == 0) return false;
  return v_bound(c.record.count, p) <= 2.0 * b_h(c.cell.depth, p);
}

void eliminate(ActiveCell& c) {
  double min_up = kInf;
  int argmin = c.candidates.front();  // candidates are sorted ascending
  for (int y : c.candidates) {
    const LabelBound& lb = c.record.labels[static_cast<std::size_t>(y - 1)];
    if (lb.upper < min_up) {
      min_up = lb.upper;
      argmin = y;
    }
  }
  std::vector<int> kept;
  kept.reserve(c.candidates.size());
  for (int y : c.candidates) {
    const LabelBound& lb = c.record.labels[static_cast<std::size_t>(y - 1)];
    // keep the argmin-upper label unconditionally so the set never empties
    if (lb.lower <= min_up || y == argmin) kept.push_back(y);
  }
  c.candidates = std::move(kept);
}

StepRecord step(LearnerState& s, const Problem& problem,
                std::mt19937_64& rng) {
  assert(!s.queue.empty());
  auto top = *s.queue.begin();
  auto it = s.active.find(top.key);
  assert(it != s.active.end());
  ActiveCell& ac = it->second;

  StepRecord rec;
  rec.depth = top.key.depth;
  rec.index = top.key.index;

  if (should_refine(ac, s.params)) {
    auto kids = children(ac.cell);  // may throw DepthCapExceeded
    ActiveCell left, right;
    left.cell = std::move(kids[0]);
    right.cell = std::move(kids[1]);
    left.record = inherit_record(ac.record);
    right.record = inherit_record(ac.record);
    left.candidates = ac.candidates;
    right.candidates = ac.candidates;
    s.queue.erase(s.queue.begin());
    s.active.erase(it);
    insert_active(s, std::move(left));
    insert_active(s, std::move(right));
    s.refine_steps += 1;
    rec.action = StepAction::kRefine;
  } else {
    auto costs = problem.sample_cost(ac.cell.center(), rng);
    record_costs(ac.record, costs, ac.candidates, s.params, ac.cell.depth);
    s.used += 1;
    s.query_steps += 1;
    rec.queried = ac.candidates;
    for (int y : rec.queried)
      s.label_query_counts[static_cast<std::size_t>(y - 1)] += 1;
    eliminate(ac);
    if (ac.candidates.size() == 1) {
      ClassifiedCell done;
      done.cell = std::move(ac.cell);
      done.label = ac.candidates.front();
      done.record = std::move(ac.record);
      s.queue.erase(s.queue.begin());
      s.active.erase(it);
      s.classified.push_back(std::move(done));
      rec.action = StepAction::kClassifyCell;
    } else {
      s.queue.erase(s.queue.begin());
      s.queue.insert({uncertainty(ac), top.key});
      rec.action = StepAction::kQuery;
    }
  }

  s.steps += 1;
  rec.t = s.steps;
  rec.used = s.used;
  rec.unclassified = s.active.size();
  rec.classified = s.classified.size();
  rec.max_depth = s.max_depth;
  return rec;
}

void run_steps(LearnerState& s, const Problem& problem, std::mt19937_64& rng,
               const StepObserver& observer) {
  while (s.used < s.params.budget && !s.active.empty()) {
    StepRecord rec;
    try {
      rec = step(s, problem, rng);
    } catch (const DepthCapExceeded&) {
      s.depth_cap_hit = true;
      break;
    }
    if (observer) observer(s, rec);
  }
}

namespace {

int label_for(const ActiveCell& c) {
  double min_up = kInf;
  int best = c.candidates.front();
  for (int y : c.candidates) {
    const LabelBound& lb = c.record.labels[static_cast<std::size_t>(y - 1)];
    if (lb.upper < min_up) {
      min_up = lb.upper;
      best = y;
    }
  }
  return best;
}

}  // namespace

TreeClassifier extract_classifier(const LearnerState& s) {
  TreeClassifier tc;
  tc.dim = s.params.geom.dim;
  tc.max_depth = s.max_depth;
  for (const auto& [k, c] : s.active) tc.leaf_labels.emplace(k, label_for(c));
  for (const auto& c : s.classified)
    tc.leaf_labels.emplace(key_of(c.cell), c.label);
  return tc;
}

int TreeClassifier::operator()(std::span<const double> x) const {
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("classify: point outside [0,1]^d");
  CellKey k = descend(
      x, dim, [&](const CellKey& q) { return leaf_labels.count(q) > 0; },
      max_depth);
  return leaf_labels.at(k);
}

int classify(std::span<const double> x, const LearnerState& s) {
  return extract_classifier(s)(x);
}

RunResult run(const Problem& problem, const LearnerParams& params,
              std::uint64_t seed, const StepObserver& observer) {
  BoundParams bp = make_bound_params(params.budget, problem.labels,
                                     params.alpha, params.holder_L,
                                     params.geom);
  LearnerState s = init_state(bp);
  std::mt19937_64 rng(seed);
  run_steps(s, problem, rng, observer);
  RunResult out{std::move(s), {}};
  out.classifier = extract_classifier(out.state);
  return out;
}

}  // namespace csal
