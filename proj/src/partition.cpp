#include "csal/partition.hpp"

#include <cmath>
#include <unordered_map>

#include "csal/errors.hpp"

namespace csal {

PartitionGeometry standard_geometry(int dim) {
  if (dim < 1) throw std::invalid_argument("partition dimension must be >= 1");
  return {dim, std::pow(2.0, -1.0 / dim), 0.25, std::sqrt(double(dim))};
}

int depth_cap(int dim) { return 60 * dim; }

std::vector<double> Cell::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t j = 0; j < lo.size(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
  return c;
}

double Cell::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool Cell::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (x[j] < lo[j] || x[j] > hi[j]) return false;
  return true;
}

Cell root_cell(int dim) {
  if (dim < 1) throw std::invalid_argument("partition dimension must be >= 1");
  Cell c;
  c.depth = 0;
  c.index = 1;
  c.lo.assign(dim, 0.0);
  c.hi.assign(dim, 1.0);
  return c;
}

std::array<Cell, 2> children(const Cell& cell) {
  int d = cell.dim();
  if (cell.depth >= static_cast<std::uint32_t>(depth_cap(d)))
    throw DepthCapExceeded("refinement beyond depth cap (" +
                           std::to_string(depth_cap(d)) + " splits)");
  // index arithmetic is exact only while 2*index fits in 64 bits
  if (cell.depth >= 63)
    throw DepthCapExceeded("refinement beyond representable cell indices");
  int axis = cell.split_axis();
  double mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
  Cell lo = cell, hi = cell;
  lo.depth = hi.depth = cell.depth + 1;
  lo.index = 2 * cell.index - 1;
  hi.index = 2 * cell.index;
  lo.hi[axis] = mid;
  hi.lo[axis] = mid;
  return {std::move(lo), std::move(hi)};
}

namespace {
struct KeyHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<std::uint64_t>{}(k.index * 0x9e3779b97f4a7c15ull + k.depth);
  }
};
}  // namespace

const Cell& locate(std::span<const double> x, std::span<const Cell> leaves) {
  if (leaves.empty()) throw std::invalid_argument("locate: empty leaf set");
  int d = leaves[0].dim();
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("locate: dimension mismatch");
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("locate: point outside [0,1]^d");
  std::unordered_map<CellKey, const Cell*, KeyHash> by_key;
  std::uint32_t max_depth = 0;
  for (const Cell& c : leaves) {
    by_key.emplace(key_of(c), &c);
    max_depth = std::max(max_depth, c.depth);
  }
  CellKey k = descend(
      x, d, [&](const CellKey& q) { return by_key.count(q) > 0; }, max_depth);
  return *by_key.at(k);
}

}  // namespace csal
