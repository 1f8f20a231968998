#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "cle/lattice.hpp"
#include "cle/loops.hpp"
#include "oracle.hpp"

using namespace cle;

namespace {

SiteConfiguration blank(const LatticeSpec& spec, std::uint8_t value) {
  SiteConfiguration config;
  config.spec = spec;
  const CellLattice lat(spec);
  const std::size_t n = spec.geometry == Geometry::TriangularSite ? lat.domain_cells().size()
                                                                  : static_cast<std::size_t>(BondIndex(lat).size());
  config.states.assign(n, value);
  return config;
}

void check_structure(const LoopConfiguration& loops) {
  const auto polys = oracle::polygons(loops);
  std::set<PolyPoint> seen;
  for (std::size_t i = 0; i < loops.loops.size(); ++i) {
    const auto& loop = loops.loops[i];
    for (auto v : loop.vertices) CHECK(seen.insert(v).second);  // vertex-disjoint and simple
    CHECK(oracle::signed_area(polys[i]) > 0);                   // counterclockwise
    if (i > 0) CHECK(loops.loops[i - 1].key < loop.key);
    if (loop.parent != kNoLoop) {
      const auto& outer = polys[static_cast<std::size_t>(loop.parent)];
      CHECK(oracle::contains(outer, polys[i][0]));
      CHECK(loop.depth == loops.loops[static_cast<std::size_t>(loop.parent)].depth + 1);
    } else {
      CHECK(loop.depth == 1);
    }
  }
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (std::size_t j = i + 1; j < polys.size(); ++j) {
      CHECK_FALSE(oracle::polygons_meet(polys[i], polys[j]));
      // Disjoint boundaries: nested iff one contains a vertex of the other.
      const bool i_in_j = oracle::contains(polys[j], polys[i][0]);
      const bool j_in_i = oracle::contains(polys[i], polys[j][0]);
      CHECK_FALSE((i_in_j && j_in_i));
    }
}

}  // namespace

TEST_CASE("closed sites give no loops") {
  const auto loops = extract_loops(blank(LatticeSpec::percolation(10), 0));
  CHECK(loops.loops.empty());
  for (auto l : loops.cell_loop) CHECK(l == kNoLoop);
}

TEST_CASE("one open site gives one hexagon") {
  auto config = blank(LatticeSpec::percolation(10), 0);
  const CellLattice lat(config.spec);
  const auto& cells = lat.domain_cells();
  const auto pos = std::find(cells.begin(), cells.end(), lat.center()) - cells.begin();
  config.states[static_cast<std::size_t>(pos)] = 1;
  const auto loops = extract_loops(config);
  REQUIRE(loops.loops.size() == 1);
  CHECK(loops.loops[0].vertices.size() == 6);
  CHECK(loops.depth_of_cell(lat.center()) == 1);
  CHECK(loops.depth_of_cell(lat.neighbor(lat.center(), 0)) == 0);
  CHECK(interface_edge_count(config) == 6);
}

TEST_CASE("all sites open gives one loop along the boundary") {
  const auto config = blank(LatticeSpec::percolation(8), 1);
  const auto loops = extract_loops(config);
  REQUIRE(loops.loops.size() == 1);
  const CellLattice lat(config.spec);
  for (CellIndex c : lat.domain_cells()) CHECK(loops.depth_of_cell(c) == 1);
}

TEST_CASE("fk extremes") {
  const auto spec = LatticeSpec::fk(6, 2.0);
  const CellLattice lat(spec);
  std::size_t primal = 0;
  for (CellIndex c : lat.domain_cells()) primal += lat.is_primal(lat.coord(c)) ? 1 : 0;
  // Closed bonds: every primal vertex is its own cluster with a 4-edge loop.
  const auto closed = extract_loops(blank(spec, 0));
  CHECK(closed.loops.size() == primal);
  for (const auto& loop : closed.loops) CHECK(loop.vertices.size() == 4);
  // Open bonds: one primal cluster, each interior dual vertex encircled.
  const auto open = extract_loops(blank(spec, 1));
  std::size_t dual = lat.domain_cells().size() - primal;
  CHECK(open.loops.size() == 1 + dual);
  check_structure(open);
}

TEST_CASE("interface parity and non-crossing on random configurations") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto perc = sample_percolation(LatticeSpec::percolation(16), seed);
    const auto lp = extract_loops(perc);
    CHECK(lp.total_length() == interface_edge_count(perc));
    check_structure(lp);
    const auto fk = sample_fk_ising(LatticeSpec::fk(12, 2.0), seed, 20);
    const auto lf = extract_loops(fk);
    CHECK(lf.total_length() == interface_edge_count(fk));
    check_structure(lf);
  }
}

TEST_CASE("cell index agrees with point-in-polygon depths") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (const auto& config :
         {sample_percolation(LatticeSpec::percolation(12), seed), sample_fk_ising(LatticeSpec::fk(10, 2.0), seed, 20)}) {
      auto loops = extract_loops(config);
      const auto polys = oracle::polygons(loops);
      for (CellIndex c = 0; c < loops.lattice->size(); ++c)
        CHECK(loops.depth_of_cell(c) == oracle::depth(polys, loops.lattice->position(c)));
      const auto extracted = loops.cell_loop;
      rebuild_cell_index(loops);
      CHECK(loops.cell_loop == extracted);
    }
  }
}

TEST_CASE("extraction is deterministic") {
  const auto config = sample_percolation(LatticeSpec::percolation(32), 77);
  const auto a = extract_loops(config);
  const auto b = extract_loops(config);
  REQUIRE(a.loops.size() == b.loops.size());
  for (std::size_t i = 0; i < a.loops.size(); ++i) {
    CHECK(a.loops[i].vertices == b.loops[i].vertices);
    CHECK(a.loops[i].parent == b.loops[i].parent);
  }
  CHECK(a.cell_loop == b.cell_loop);
}
