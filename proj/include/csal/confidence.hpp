#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csal/partition.hpp"

namespace csal {

// Shared parameters of the confidence machinery for one run of budget n
// with M labels on declared smoothness (alpha, L).
struct BoundParams {
  std::uint64_t budget = 0;  // n
  int num_labels = 0;        // M
  double alpha = 1.0;
  double holder_L = 1.0;  // L
  PartitionGeometry geom;
  double log_term = 0.0;  // ln(2 n^3 M), cached
};

BoundParams make_bound_params(std::uint64_t budget, int num_labels,
                              double alpha, double holder_L,
                              const PartitionGeometry& geom);

// Deviation width sqrt(ln(2 n^3 M) / (2 count)); +infinity for count == 0.
double v_bound(std::uint64_t count, const BoundParams& p);

// Smoothness bias of a depth-h cell: L * (nu2 * rho^h)^alpha.
double b_h(std::uint32_t depth, const BoundParams& p);

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running cost statistics of one label within one cell. Bounds are
// extended reals: untouched records carry IEEE -inf / +inf, which order
// and min/max correctly; no finite sentinels anywhere.
struct LabelBound {
  double mean = 0.0;
  double lower = -kInf;
  double upper = kInf;
};

struct ConfidenceRecord {
  std::uint64_t count = 0;           // samples observed in this cell
  std::vector<LabelBound> labels;    // size M, label y at [y-1]
};

ConfidenceRecord make_record(int num_labels);

// Fold one observed cost vector into the record: bump count, update the
// running mean of each candidate label, and tighten its clipped bounds
//   lower = max(mean - w, lower), upper = min(mean + w, upper)
// with w = v_bound(count) + b_h(depth). Non-candidate labels are left
// untouched. Throws OracleError when a candidate's cost is outside [0,1].
void record_costs(ConfidenceRecord& rec, std::span<const double> costs,
                  std::span<const int> candidates, const BoundParams& p,
                  std::uint32_t depth);

// Child record at a refinement: bounds copied verbatim, count and means
// reset (only within-cell samples ever feed a cell's mean).
ConfidenceRecord inherit_record(const ConfidenceRecord& parent);

}  // namespace csal
