#include "cle/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cle/error.hpp"

namespace cle {
namespace {

constexpr double kRingSlack = 1e-9;

void require_in_disk(Point z, const char* what) {
  if (!(std::hypot(z.x, z.y) < 1.0)) throw DomainError(std::string(what) + " lies outside the unit disk");
}

void require_ball_in_disk(Point z, double r) {
  if (!(r >= 0.0)) throw ArgumentError("ball radius must be non-negative");
  if (std::hypot(z.x, z.y) + r > 1.0 + 1e-12) throw DomainError("ball is not contained in the domain");
}

}  // namespace

NestingDepthGrid nesting_depth(const LoopConfiguration& loops) {
  NestingDepthGrid grid;
  grid.lattice = loops.lattice;
  grid.depth.resize(loops.cell_loop.size());
  for (std::size_t i = 0; i < grid.depth.size(); ++i) {
    grid.depth[i] = loops.depth_of_loop(loops.cell_loop[i]);
    grid.max_depth = std::max(grid.max_depth, grid.depth[i]);
  }
  return grid;
}

BallProbe::BallProbe(const CellLattice& lattice, double eps_cells) : lattice_(&lattice), eps_(eps_cells) {
  // The probe point is within 0.6 of its nearest cell, so this superset of the
  // ring is filtered exactly at query time.
  const double inner = eps_cells - 1.0 - 0.6;
  const double outer = eps_cells + 0.6;
  const int span = static_cast<int>(std::ceil(outer * 2.0)) + 2;
  std::vector<std::pair<double, CellCoord>> ring;
  for (int dv = -span; dv <= span; ++dv) {
    for (int du = -span; du <= span; ++du) {
      const auto p = lattice.position(CellCoord{du, dv});
      const double d = std::hypot(p[0], p[1]);
      if (d > inner && d <= outer) ring.emplace_back(std::atan2(p[1], p[0]), CellCoord{du, dv});
    }
  }
  // Angular order: neighbouring probes tend to share loops.
  std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  offsets_.reserve(ring.size());
  for (const auto& r : ring) offsets_.push_back(r.second);
}

LoopIndex BallProbe::enclosing_loop(const LoopConfiguration& loops, double x, double y) const {
  const CellIndex c0 = lattice_->nearest_cell(x, y);
  LoopIndex cur = loops.loop_of_cell(c0);
  if (cur == kNoLoop) return kNoLoop;
  const CellCoord base = lattice_->coord(c0);
  const double lo = eps_ - 1.0 - kRingSlack;
  for (const CellCoord off : offsets_) {
    const CellCoord c{base.u + off.u, base.v + off.v};
    const auto p = lattice_->position(c);
    const double d = std::hypot(p[0] - x, p[1] - y);
    if (d <= lo || d > eps_) continue;
    const LoopIndex l = loops.loop_of_cell(lattice_->index(c));
    if (l == cur) continue;
    cur = loops.common_ancestor(cur, l);
    if (cur == kNoLoop) break;
  }
  return cur;
}

CellIndex cell_at(const LoopConfiguration& loops, Point z) {
  return loops.lattice->nearest_cell_unit(z.x, z.y);
}

int count_surrounding_ball(const LoopConfiguration& loops, Point z, double eps) {
  require_ball_in_disk(z, eps);
  const double radius = loops.lattice->radius();
  const BallProbe probe(*loops.lattice, eps * radius);
  return loops.depth_of_loop(probe.enclosing_loop(loops, z.x * radius, z.y * radius));
}

int co_nesting_count(const LoopConfiguration& loops, Point z, Point w) {
  require_in_disk(z, "z");
  require_in_disk(w, "w");
  if (z == w) throw ArgumentError("co-nesting count needs two distinct points");
  const LoopIndex a = loops.loop_of_cell(cell_at(loops, z));
  const LoopIndex b = loops.loop_of_cell(cell_at(loops, w));
  return loops.depth_of_loop(loops.common_ancestor(a, b));
}

ChainExtent chain_extent(const LoopConfiguration& loops, Point z) {
  require_in_disk(z, "z");
  const CellLattice& lattice = *loops.lattice;
  ChainExtent out;
  out.chain = loops.chain(loops.loop_of_cell(cell_at(loops, z)));
  const std::size_t m = out.chain.size();
  out.nearest.assign(m, std::numeric_limits<double>::infinity());
  out.farthest.assign(m, 0.0);
  if (m == 0) return out;
  const double zx = z.x * lattice.radius();
  const double zy = z.y * lattice.radius();
  auto dist = [&](CellIndex c) {
    const auto p = lattice.position(c);
    return std::hypot(p[0] - zx, p[1] - zy);
  };
  auto visit = [&](LoopIndex inner, CellIndex a, CellIndex b) {
    const int d = loops.depth_of_loop(inner);
    if (d < 1 || static_cast<std::size_t>(d) > m || out.chain[static_cast<std::size_t>(d - 1)] != inner) return;
    const double da = dist(a);
    const double db = dist(b);
    auto& lo = out.nearest[static_cast<std::size_t>(d - 1)];
    auto& hi = out.farthest[static_cast<std::size_t>(d - 1)];
    lo = std::min({lo, da, db});
    hi = std::max({hi, da, db});
  };
  const int half = lattice.neighbor_count() / 2;
  for (CellIndex x = 0; x < lattice.size(); ++x) {
    const LoopIndex lx = loops.cell_loop[static_cast<std::size_t>(x)];
    for (int k = 0; k < half; ++k) {
      const CellIndex y = lattice.neighbor(x, k);
      if (y < 0) continue;
      const LoopIndex ly = loops.cell_loop[static_cast<std::size_t>(y)];
      if (lx == ly) continue;
      if (lx != kNoLoop && loops.parent_of(lx) == ly)
        visit(lx, x, y);
      else if (ly != kNoLoop && loops.parent_of(ly) == lx)
        visit(ly, x, y);
    }
  }
  return out;
}

JIndices j_cap_j_subset(const LoopConfiguration& loops, Point z, double r) {
  require_ball_in_disk(z, r);
  return j_indices_from_extent(chain_extent(loops, z), r * loops.lattice->radius());
}

JIndices j_indices_from_extent(const ChainExtent& ext, double rc) {
  JIndices out;
  for (std::size_t j = 0; j < ext.chain.size(); ++j) {
    if (!out.cap && ext.nearest[j] <= rc) out.cap = static_cast<int>(j + 1);
    if (!out.subset && ext.farthest[j] <= rc) out.subset = static_cast<int>(j + 1);
  }
  return out;
}

}  // namespace cle
