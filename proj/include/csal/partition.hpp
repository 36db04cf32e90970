#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace csal {

// Scaling constants of the dyadic cyclic-axis partition of [0,1]^d.
// Every depth-h cell satisfies
//   B(center, nu1 * rho^h)  inside  cell  inside  B(center, nu2 * rho^h).
struct PartitionGeometry {
  int dim = 1;
  double rho = 0.5;
  double nu1 = 0.25;
  double nu2 = 1.0;
};

// rho = 2^(-1/d), nu1 = 1/4, nu2 = sqrt(d).
PartitionGeometry standard_geometry(int dim);

// Maximum admissible depth: 60*d splits, i.e. each coordinate halved at
// most 60 times. Beyond this, box endpoints degenerate in double precision.
int depth_cap(int dim);

// One axis-aligned box of the partition tree. depth = h, index = i with
// i in [1, 2^h]; the root is (0, 1). Children of (h, i) are (h+1, 2i-1)
// and (h+1, 2i), split at the midpoint of axis (h mod d).
struct Cell {
  std::uint32_t depth = 0;
  std::uint64_t index = 1;
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  int split_axis() const { return static_cast<int>(depth % lo.size()); }
  std::vector<double> center() const;
  double volume() const;
  bool contains(std::span<const double> x) const;
};

struct CellKey {
  std::uint32_t depth = 0;
  std::uint64_t index = 1;
  auto operator<=>(const CellKey&) const = default;
};

inline CellKey key_of(const Cell& c) { return {c.depth, c.index}; }

Cell root_cell(int dim);

// Split into the two children. Throws DepthCapExceeded at the cap.
std::array<Cell, 2> children(const Cell& cell);

// Leaf of `leaves` containing x, where `leaves` must tile [0,1]^d.
// Points on a split boundary resolve to the lower-index cell. Throws
// std::invalid_argument for x outside [0,1]^d, std::runtime_error if the
// descent falls off the leaf set (i.e. `leaves` was not a partition).
const Cell& locate(std::span<const double> x, std::span<const Cell> leaves);

// Descend from the root to the leaf selected by `is_leaf(key)`; returns its
// key. Same boundary rule as locate(). `max_depth` bounds the walk.
template <class Pred>
CellKey descend(std::span<const double> x, int dim, const Pred& is_leaf,
                std::uint32_t max_depth) {
  std::vector<double> lo(dim, 0.0), hi(dim, 1.0);
  CellKey k{0, 1};
  while (!is_leaf(k)) {
    if (k.depth >= max_depth)
      throw std::runtime_error("partition descent exceeded max depth; leaf set is not a partition");
    int axis = static_cast<int>(k.depth % dim);
    double mid = 0.5 * (lo[axis] + hi[axis]);
    if (x[axis] <= mid) {
      k = {k.depth + 1, 2 * k.index - 1};
      hi[axis] = mid;
    } else {
      k = {k.depth + 1, 2 * k.index};
      lo[axis] = mid;
    }
  }
  return k;
}

}  // namespace csal
