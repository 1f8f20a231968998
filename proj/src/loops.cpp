#include "cle/loops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "cle/detail/union_find.hpp"
#include "cle/error.hpp"

namespace cle {
namespace {

// Local connectivity of a configuration. For percolation two touching sites
// are linked when they have the same state; for FK a cell is linked to its
// diagonal neighbour x + d_k + d_{k+1} by an open primal bond (primal cells)
// or by a dual bond crossing a closed or absent primal bond (dual cells).
class Medium {
 public:
  Medium(const SiteConfiguration& config, const CellLattice& lattice)
      : lattice_(lattice), states_(config.states) {
    if (lattice.geometry() == Geometry::TriangularSite) {
      if (config.states.size() != lattice.domain_cells().size())
        throw FormatError("state vector length does not match the lattice");
      colour_.assign(static_cast<std::size_t>(lattice.size()), 0);
      const auto& cells = lattice.domain_cells();
      for (std::size_t k = 0; k < cells.size(); ++k)
        colour_[static_cast<std::size_t>(cells[k])] = config.states[k];
    } else {
      bonds_.emplace(lattice);
      if (config.states.size() != static_cast<std::size_t>(bonds_->size()))
        throw FormatError("state vector length does not match the bond count");
    }
  }

  bool triangular() const { return !bonds_.has_value(); }
  std::uint8_t colour(CellIndex c) const { return c < 0 ? 0 : colour_[static_cast<std::size_t>(c)]; }

  bool bond_open(CellIndex a, CellIndex b) const {
    const auto bond = bonds_->bond_between(a, b);
    return bond >= 0 && states_[static_cast<std::size_t>(bond)] != 0;
  }

  // FK: x linked to x + d_k + d_{k+1}.
  bool diagonal_linked(CellIndex x, int k) const {
    const CellCoord c = lattice_.coord(x);
    const CellCoord dk = lattice_.direction(k);
    const CellCoord dk1 = lattice_.direction((k + 1) % 4);
    if (lattice_.is_primal(c)) return bond_open(x, lattice_.index(c.u + dk.u + dk1.u, c.v + dk.v + dk1.v));
    return !bond_open(lattice_.index(c.u + dk.u, c.v + dk.v), lattice_.index(c.u + dk1.u, c.v + dk1.v));
  }

 private:
  const CellLattice& lattice_;
  const std::vector<std::uint8_t>& states_;
  std::vector<std::uint8_t> colour_;
  std::optional<BondIndex> bonds_;
};

struct Clusters {
  std::vector<std::int32_t> label;  // per box cell; 0 is the exterior cluster
  std::int32_t count = 1;
};

Clusters label_clusters(const CellLattice& lattice, const Medium& medium) {
  const CellIndex n = lattice.size();
  const std::int32_t root_node = n;
  detail::UnionFind uf(static_cast<std::size_t>(n) + 1);
  for (CellIndex x : lattice.domain_cells()) {
    if (medium.triangular()) {
      for (int k = 0; k < 6; ++k) {
        const CellIndex y = lattice.neighbor(x, k);
        if (!lattice.in_domain(y)) {
          if (medium.colour(x) == 0) uf.unite(x, root_node);
        } else if (k < 3 && medium.colour(x) == medium.colour(y)) {
          uf.unite(x, y);
        }
      }
    } else {
      const CellCoord c = lattice.coord(x);
      for (int k = 0; k < 4; ++k) {
        const CellCoord a = lattice.direction(k);
        const CellCoord b = lattice.direction((k + 1) % 4);
        const CellIndex y = lattice.index(c.u + a.u + b.u, c.v + a.v + b.v);
        if (!lattice.in_domain(y)) {
          if (medium.diagonal_linked(x, k)) uf.unite(x, root_node);
        } else if ((k == 0 || k == 3) && medium.diagonal_linked(x, k)) {
          uf.unite(x, y);
        }
      }
    }
  }
  Clusters out;
  out.label.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> id(static_cast<std::size_t>(n) + 1, -1);
  id[static_cast<std::size_t>(uf.find(root_node))] = 0;
  for (CellIndex x : lattice.domain_cells()) {
    auto& slot = id[static_cast<std::size_t>(uf.find(x))];
    if (slot < 0) slot = out.count++;
    out.label[static_cast<std::size_t>(x)] = slot;
  }
  return out;
}

struct TreeStart {
  CellIndex inside = kOutsideBox;
  int dir = 0;
};

std::vector<PolyPoint> trace(const CellLattice& lattice, const Medium& medium,
                             const std::vector<std::int32_t>& label, TreeStart start) {
  const int nd = lattice.neighbor_count();
  std::vector<PolyPoint> out;
  CellIndex a = start.inside;
  int k = start.dir;
  const std::size_t guard = 4 * static_cast<std::size_t>(lattice.size()) + 16;
  do {
    const CellCoord ca = lattice.coord(a);
    const CellCoord dk = lattice.direction(k);
    const CellCoord dk1 = lattice.direction((k + 1) % nd);
    const CellCoord cb{ca.u + dk.u, ca.v + dk.v};
    const CellCoord cc{ca.u + dk1.u, ca.v + dk1.v};
    if (medium.triangular()) {
      out.push_back({ca.u + cb.u + cc.u, ca.v + cb.v + cc.v});
      const CellIndex c = lattice.index(cc);
      if (label[static_cast<std::size_t>(c)] == label[static_cast<std::size_t>(a)]) {
        a = c;
        k = (k + 5) % 6;
      } else {
        k = (k + 1) % 6;
      }
    } else {
      const PolyPoint pa = lattice.polygon_point(ca);
      const PolyPoint pb = lattice.polygon_point(cb);
      out.push_back({(pa.x + pb.x) / 2, (pa.y + pb.y) / 2});
      if (medium.diagonal_linked(a, k)) {
        a = lattice.index(cb.u + dk1.u, cb.v + dk1.v);
        k = (k + 3) % 4;
      } else {
        k = (k + 1) % 4;
      }
    }
    if (out.size() > guard) throw std::logic_error("loop tracing did not close");
  } while (a != start.inside || k != start.dir);
  return out;
}

}  // namespace

LoopIndex LoopConfiguration::common_ancestor(LoopIndex a, LoopIndex b) const {
  int da = depth_of_loop(a);
  int db = depth_of_loop(b);
  while (da > db) {
    a = parent_of(a);
    --da;
  }
  while (db > da) {
    b = parent_of(b);
    --db;
  }
  while (a != b) {
    a = parent_of(a);
    b = parent_of(b);
  }
  return a;
}

std::vector<LoopIndex> LoopConfiguration::chain(LoopIndex l) const {
  std::vector<LoopIndex> out;
  for (; l != kNoLoop; l = parent_of(l)) out.push_back(l);
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t LoopConfiguration::total_length() const {
  std::size_t n = 0;
  for (const auto& loop : loops) n += loop.vertices.size();
  return n;
}

LoopConfiguration extract_loops(const SiteConfiguration& config) {
  auto lattice = std::make_shared<const CellLattice>(config.spec);
  const Medium medium(config, *lattice);
  const Clusters clusters = label_clusters(*lattice, medium);
  const auto& label = clusters.label;
  const auto nc = static_cast<std::size_t>(clusters.count);

  // Members of each cluster by counting sort.
  std::vector<std::int32_t> offset(nc + 1, 0);
  for (auto l : label) ++offset[static_cast<std::size_t>(l) + 1];
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<CellIndex> members(label.size());
  {
    auto fill = offset;
    for (CellIndex x = 0; x < lattice->size(); ++x)
      members[static_cast<std::size_t>(fill[static_cast<std::size_t>(label[static_cast<std::size_t>(x)])]++)] = x;
  }

  // Breadth-first search of the cluster adjacency tree from the exterior.
  const int nd = lattice->neighbor_count();
  std::vector<std::int32_t> parent(nc, -1), depth(nc, 0);
  std::vector<TreeStart> start(nc);
  std::vector<std::uint8_t> seen(nc, 0);
  std::vector<std::int32_t> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto cl = static_cast<std::size_t>(queue[head]);
    for (auto m = offset[cl]; m < offset[cl + 1]; ++m) {
      const CellIndex x = members[static_cast<std::size_t>(m)];
      for (int k = 0; k < nd; ++k) {
        const CellIndex y = lattice->neighbor(x, k);
        if (y < 0) continue;
        const auto cy = static_cast<std::size_t>(label[static_cast<std::size_t>(y)]);
        if (seen[cy]) continue;
        seen[cy] = 1;
        parent[cy] = static_cast<std::int32_t>(cl);
        depth[cy] = depth[cl] + 1;
        start[cy] = {y, (k + nd / 2) % nd};
        queue.push_back(static_cast<std::int32_t>(cy));
      }
    }
  }

  std::vector<Loop> loops(nc - 1);
  for (std::size_t cl = 1; cl < nc; ++cl) {
    Loop& loop = loops[cl - 1];
    loop.vertices = trace(*lattice, medium, label, start[cl]);
    loop.key = *std::min_element(loop.vertices.begin(), loop.vertices.end());
    loop.depth = depth[cl];
  }

  // Canonical order by key.
  std::vector<LoopIndex> order(loops.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](LoopIndex a, LoopIndex b) {
    return loops[static_cast<std::size_t>(a)].key < loops[static_cast<std::size_t>(b)].key;
  });
  std::vector<LoopIndex> rank(loops.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<LoopIndex>(i);
  auto loop_of_cluster = [&](std::int32_t cl) { return cl <= 0 ? kNoLoop : rank[static_cast<std::size_t>(cl - 1)]; };

  LoopConfiguration out;
  out.spec = config.spec;
  out.seed = config.seed;
  out.sweep_count = config.sweep_count;
  out.boundary_note = config.meta.boundary_note;
  out.loops.resize(loops.size());
  for (std::size_t cl = 1; cl < nc; ++cl) {
    const LoopIndex r = loop_of_cluster(static_cast<std::int32_t>(cl));
    out.loops[static_cast<std::size_t>(r)] = std::move(loops[cl - 1]);
    out.loops[static_cast<std::size_t>(r)].parent = loop_of_cluster(parent[cl]);
  }
  out.cell_loop.resize(label.size());
  for (std::size_t x = 0; x < label.size(); ++x) out.cell_loop[x] = loop_of_cluster(label[x]);
  out.lattice = std::move(lattice);
  return out;
}

std::size_t interface_edge_count(const SiteConfiguration& config) {
  const CellLattice lattice(config.spec);
  const Medium medium(config, lattice);
  const auto label = label_clusters(lattice, medium).label;
  std::size_t count = 0;
  for (CellIndex x = 0; x < lattice.size(); ++x) {
    for (int k = 0; k < lattice.neighbor_count(); ++k) {
      const CellIndex y = lattice.neighbor(x, k);
      if (y <= x) continue;
      if (!lattice.in_domain(x) && !lattice.in_domain(y)) continue;
      if (label[static_cast<std::size_t>(x)] != label[static_cast<std::size_t>(y)]) ++count;
    }
  }
  return count;
}

void rebuild_cell_index(LoopConfiguration& config) {
  if (!config.lattice) config.lattice = std::make_shared<const CellLattice>(config.spec);
  const CellLattice& lattice = *config.lattice;
  const std::size_t n = config.loops.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LoopIndex p = config.loops[i].parent;
    if (p != kNoLoop && (p < 0 || static_cast<std::size_t>(p) >= n))
      throw FormatError("loop parent index out of range");
  }
  // Depths by walking to the root; a cycle in the parent array is a format error.
  std::vector<int> depth(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int d = 1;
    for (LoopIndex p = config.loops[i].parent; p != kNoLoop; p = config.loops[static_cast<std::size_t>(p)].parent) {
      if (++d > static_cast<int>(n) + 1) throw FormatError("loop parent array contains a cycle");
    }
    depth[i] = d;
    config.loops[i].depth = d;
  }
  std::vector<LoopIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](LoopIndex a, LoopIndex b) {
    return depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)];
  });

  const bool tri = lattice.geometry() == Geometry::TriangularSite;
  const int row_step = tri ? 3 : 2;
  config.cell_loop.assign(static_cast<std::size_t>(lattice.size()), kNoLoop);
  std::vector<std::pair<int, double>> crossings;
  for (LoopIndex l : order) {
    const auto& vs = config.loops[static_cast<std::size_t>(l)].vertices;
    crossings.clear();
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const PolyPoint p = vs[i];
      const PolyPoint q = vs[(i + 1) % vs.size()];
      if (p.y == q.y) continue;
      const int lo = std::min(p.y, q.y);
      const int hi = std::max(p.y, q.y);
      // Cell rows are multiples of row_step; vertices never lie on them.
      int row = lo + ((row_step - lo % row_step) % row_step);
      for (; row < hi; row += row_step) {
        const double x = p.x + static_cast<double>(row - p.y) * (q.x - p.x) / (q.y - p.y);
        crossings.emplace_back(row, x);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      const int row = crossings[i].first;
      if (crossings[i + 1].first != row) throw FormatError("loop polygon is not closed");
      const double x1 = crossings[i].second;
      const double x2 = crossings[i + 1].second;
      if (tri) {
        const int v = row / 3;
        for (int u = static_cast<int>(std::floor(x1 / 3.0)) + 1; 3 * u < x2; ++u) {
          const CellIndex c = lattice.index(u, v);
          if (c >= 0) config.cell_loop[static_cast<std::size_t>(c)] = l;
        }
      } else {
        const int b = row / 2;
        int a = static_cast<int>(std::floor(x1 / 2.0)) + 1;
        if (((a - b) % 2 + 2) % 2 != 0) ++a;
        for (; 2 * a < x2; a += 2) {
          const CellIndex c = lattice.index((a + b) / 2, (b - a) / 2);
          if (c >= 0) config.cell_loop[static_cast<std::size_t>(c)] = l;
        }
      }
    }
  }
}

}  // namespace cle
