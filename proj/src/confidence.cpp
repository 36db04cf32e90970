#include "csal/confidence.hpp"

#include <cmath>

#include "csal/errors.hpp"

namespace csal {

BoundParams make_bound_params(std::uint64_t budget, int num_labels,
                              double alpha, double holder_L,
                              const PartitionGeometry& geom) {
  if (budget == 0) throw std::invalid_argument("budget must be >= 1");
  if (num_labels < 2) throw std::invalid_argument("need at least 2 labels");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(holder_L >= 0.0))
    throw std::invalid_argument("Holder constant must be >= 0");
  BoundParams p;
  p.budget = budget;
  p.num_labels = num_labels;
  p.alpha = alpha;
  p.holder_L = holder_L;
  p.geom = geom;
  p.log_term = std::log(2.0) + 3.0 * std::log(static_cast<double>(budget)) +
               std::log(static_cast<double>(num_labels));
  return p;
}

double v_bound(std::uint64_t count, const BoundParams& p) {
  if (count == 0) return kInf;
  return std::sqrt(p.log_term / (2.0 * static_cast<double>(count)));
}

double b_h(std::uint32_t depth, const BoundParams& p) {
  return p.holder_L *
         std::pow(p.geom.nu2 * std::pow(p.geom.rho, double(depth)), p.alpha);
}

ConfidenceRecord make_record(int num_labels) {
  ConfidenceRecord r;
  r.labels.assign(static_cast<std::size_t>(num_labels), LabelBound{});
  return r;
}

void record_costs(ConfidenceRecord& rec, std::span<const double> costs,
                  std::span<const int> candidates, const BoundParams& p,
                  std::uint32_t depth) {
  if (costs.size() != rec.labels.size())
    throw std::invalid_argument("cost vector size != label count");
  for (int y : candidates) {
    double c = costs[static_cast<std::size_t>(y - 1)];
    if (!(c >= 0.0 && c <= 1.0))
      throw OracleError("cost outside [0,1] for label " + std::to_string(y));
  }
  rec.count += 1;
  double width = v_bound(rec.count, p) + b_h(depth, p);
  for (int y : candidates) {
    LabelBound& lb = rec.labels[static_cast<std::size_t>(y - 1)];
    double c = costs[static_cast<std::size_t>(y - 1)];
    lb.mean += (c - lb.mean) / static_cast<double>(rec.count);
    lb.lower = std::max(lb.mean - width, lb.lower);
    lb.upper = std::min(lb.mean + width, lb.upper);
  }
}

ConfidenceRecord inherit_record(const ConfidenceRecord& parent) {
  ConfidenceRecord child;
  child.count = 0;
  child.labels = parent.labels;
  for (auto& lb : child.labels) lb.mean = 0.0;
  return child;
}

}  // namespace csal
