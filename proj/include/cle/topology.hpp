#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cle/loops.hpp"

namespace cle {

// A point of the unit disk; lattice positions are divided by the radius.
struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

struct NestingDepthGrid {
  std::shared_ptr<const CellLattice> lattice;
  std::vector<int> depth;  // per box cell
  int max_depth = 0;

  int at(CellIndex idx) const { return idx < 0 ? 0 : depth[static_cast<std::size_t>(idx)]; }
};

NestingDepthGrid nesting_depth(const LoopConfiguration& loops);

// Cells whose centres are within eps (lattice units) of a point, together with
// the cell nearest to the point, form the lattice ball. A loop surrounds the
// ball when its interior contains every one of these centres. Only the outer
// ring eps - 1 < d <= eps has to be inspected: the cells outside any loop are
// connected by steps of length at most one.
class BallProbe {
 public:
  BallProbe(const CellLattice& lattice, double eps_cells);

  double eps_cells() const { return eps_; }

  // Deepest loop surrounding the ball around (x, y) in lattice units.
  LoopIndex enclosing_loop(const LoopConfiguration& loops, double x, double y) const;

 private:
  const CellLattice* lattice_;
  double eps_;
  std::vector<CellCoord> offsets_;
};

// N_z(eps) with z and eps in unit-disk coordinates. Throws DomainError when the
// ball leaves the disk.
int count_surrounding_ball(const LoopConfiguration& loops, Point z, double eps);

// Number of loops surrounding both z and w.
int co_nesting_count(const LoopConfiguration& loops, Point z, Point w);

// Indices (1-based, outermost first) of the first loop around z that meets the
// ball B(z, r) and of the first one contained in it. A loop meets the ball when
// one of the cells on either side of it lies in the ball and is contained in it
// when all of them do.
struct JIndices {
  std::optional<int> cap;
  std::optional<int> subset;
};

JIndices j_cap_j_subset(const LoopConfiguration& loops, Point z, double r);

// Distances from z (lattice units) to the nearest and farthest cell adjacent to
// each loop of the chain around z, outermost first.
struct ChainExtent {
  std::vector<LoopIndex> chain;
  std::vector<double> nearest;
  std::vector<double> farthest;
};

ChainExtent chain_extent(const LoopConfiguration& loops, Point z);

// J indices for a ball of radius r_cells (lattice units) around the extent's point.
JIndices j_indices_from_extent(const ChainExtent& extent, double r_cells);

// Cell nearest to a unit-disk point.
CellIndex cell_at(const LoopConfiguration& loops, Point z);

}  // namespace cle
