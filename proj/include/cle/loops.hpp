#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cle/lattice.hpp"

namespace cle {

using LoopIndex = std::int32_t;
inline constexpr LoopIndex kNoLoop = -1;

struct Loop {
  std::vector<PolyPoint> vertices;  // counterclockwise, not repeated at the end
  LoopIndex parent = kNoLoop;       // smallest strictly enclosing loop
  int depth = 1;                    // 1 for outermost loops
  PolyPoint key;                    // lowest vertex; stable loop id
};

// Interface loops of one configuration together with their containment tree.
// Loops are sorted by key. cell_loop maps every box cell to the innermost loop
// whose interior contains its centre (kNoLoop when none), so the nesting depth
// of a cell is loops[cell_loop].depth.
struct LoopConfiguration {
  LatticeSpec spec;
  std::uint64_t seed = 0;
  int sweep_count = 0;
  std::string boundary_note;
  std::shared_ptr<const CellLattice> lattice;
  std::vector<Loop> loops;
  std::vector<LoopIndex> cell_loop;

  int depth_of_cell(CellIndex idx) const {
    if (idx < 0) return 0;
    const LoopIndex l = cell_loop[static_cast<std::size_t>(idx)];
    return l == kNoLoop ? 0 : loops[static_cast<std::size_t>(l)].depth;
  }
  LoopIndex loop_of_cell(CellIndex idx) const {
    return idx < 0 ? kNoLoop : cell_loop[static_cast<std::size_t>(idx)];
  }
  int depth_of_loop(LoopIndex l) const {
    return l == kNoLoop ? 0 : loops[static_cast<std::size_t>(l)].depth;
  }
  LoopIndex parent_of(LoopIndex l) const {
    return l == kNoLoop ? kNoLoop : loops[static_cast<std::size_t>(l)].parent;
  }
  // Deepest loop enclosing both (kNoLoop if none).
  LoopIndex common_ancestor(LoopIndex a, LoopIndex b) const;
  // Chain of loops enclosing the given loop, outermost first, ending with it.
  std::vector<LoopIndex> chain(LoopIndex l) const;
  std::size_t total_length() const;
};

// Traces every interface between a cluster and its dual (or between open and
// closed sites) inside the lattice disk.
LoopConfiguration extract_loops(const SiteConfiguration& config);

// Rebuilds cell_loop and the loop depths from polygons and the parent array.
void rebuild_cell_index(LoopConfiguration& loops);

// Number of cell pairs (touching cells) separated by an interface.
std::size_t interface_edge_count(const SiteConfiguration& config);

}  // namespace cle
