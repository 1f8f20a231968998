#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cle/error.hpp"
#include "cle/topology.hpp"
#include "oracle.hpp"

using namespace cle;

namespace {

SiteConfiguration concentric(int radius, std::initializer_list<double> rings) {
  // Open annuli: sites with ring[2i] <= |x| < ring[2i+1].
  SiteConfiguration config;
  config.spec = LatticeSpec::percolation(radius);
  const CellLattice lat(config.spec);
  for (CellIndex c : lat.domain_cells()) {
    const auto p = lat.position(c);
    const double r = std::hypot(p[0], p[1]);
    std::uint8_t open = 0;
    auto it = rings.begin();
    while (it != rings.end()) {
      const double lo = *it++;
      const double hi = *it++;
      if (r >= lo && r < hi) open = 1;
    }
    config.states.push_back(open);
  }
  return config;
}

Point random_point(std::mt19937_64& rng, double max_radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Point p{u(rng) * max_radius, u(rng) * max_radius};
    if (std::hypot(p.x, p.y) < max_radius) return p;
  }
}

}  // namespace

TEST_CASE("empty configuration has zero depth everywhere") {
  SiteConfiguration config = concentric(12, {});
  const auto loops = extract_loops(config);
  const auto grid = nesting_depth(loops);
  CHECK(grid.max_depth == 0);
  CHECK(count_surrounding_ball(loops, {0, 0}, 0.3) == 0);
}

TEST_CASE("concentric loops") {
  // Open disk of radius 3 inside an open annulus 6..9: two loops around the
  // centre (the annulus' outer boundary and the inner disk), plus the hole.
  const auto loops = extract_loops(concentric(16, {0, 3, 6, 9}));
  const auto grid = nesting_depth(loops);
  const auto& lat = *loops.lattice;
  CHECK(grid.at(lat.center()) == 3);
  CHECK(grid.at(lat.nearest_cell(7.5, 0)) == 1);
  CHECK(grid.at(lat.nearest_cell(12, 0)) == 0);
  CHECK(co_nesting_count(loops, {0, 0}, {0.05, 0.05}) == 3);
  CHECK(co_nesting_count(loops, {0, 0}, {7.5 / 16, 0}) == 1);
  CHECK(co_nesting_count(loops, {0, 0}, {0.8, 0}) == 0);
  // The ball of radius 4.5 lies inside the outer loop and the hole's loop but
  // meets the inner disk's boundary.
  CHECK(count_surrounding_ball(loops, {0, 0}, 4.5 / 16) == 2);
  CHECK(count_surrounding_ball(loops, {0, 0}, 1e-6) == 3);
  const auto j = j_cap_j_subset(loops, {0, 0}, 4.5 / 16);
  CHECK(j.cap == 3);
  CHECK(j.subset == 3);
  const auto big = j_cap_j_subset(loops, {0, 0}, 7.0 / 16);
  CHECK(big.cap == 2);
  CHECK(big.subset == 2);
}

TEST_CASE("errors") {
  const auto loops = extract_loops(sample_percolation(LatticeSpec::percolation(12), 1));
  CHECK_THROWS_AS(count_surrounding_ball(loops, {0.8, 0}, 0.3), DomainError);
  CHECK_THROWS_AS(co_nesting_count(loops, {0.1, 0}, {0.1, 0}), ArgumentError);
  CHECK_THROWS_AS(co_nesting_count(loops, {1.1, 0}, {0.1, 0}), DomainError);
  CHECK_THROWS_AS(j_cap_j_subset(loops, {0.5, 0}, 0.6), DomainError);
}

TEST_CASE("oracle equivalence on random small configurations") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    for (const auto& config :
         {sample_percolation(LatticeSpec::percolation(12), seed), sample_fk_ising(LatticeSpec::fk(10, 2.0), seed, 30)}) {
      const auto loops = extract_loops(config);
      const auto polys = oracle::polygons(loops);
      for (int t = 0; t < 6; ++t) {
        const Point z = random_point(rng, 0.7);
        const double eps = u01(rng) * (0.95 - std::hypot(z.x, z.y));
        CHECK(count_surrounding_ball(loops, z, eps) == oracle::surrounding_ball(loops, polys, z, eps));
        const Point w = random_point(rng, 0.95);
        CHECK(co_nesting_count(loops, z, w) == oracle::co_nesting(loops, polys, z, w));
        const auto j = j_cap_j_subset(loops, z, eps);
        const auto jo = oracle::j_indices(loops, polys, z, eps);
        CHECK(j.cap == jo.cap);
        CHECK(j.subset == jo.subset);
      }
    }
  }
}

TEST_CASE("ordering properties") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto loops = extract_loops(sample_percolation(LatticeSpec::percolation(48), seed));
    const auto grid = nesting_depth(loops);
    for (int t = 0; t < 10; ++t) {
      const Point z = random_point(rng, 0.5);
      // Monotone in eps; degenerate ball equals the depth.
      int prev = grid.at(cell_at(loops, z));
      CHECK(count_surrounding_ball(loops, z, 1e-4) == prev);
      for (double eps : {0.02, 0.05, 0.1, 0.2, 0.4}) {
        const int n = count_surrounding_ball(loops, z, eps);
        CHECK(n <= prev);
        prev = n;
        const auto j = j_cap_j_subset(loops, z, eps);
        if (j.cap && j.subset) {
          CHECK(*j.cap <= n + 1);
          CHECK(n + 1 <= *j.subset);
        }
      }
      const Point w = random_point(rng, 0.5);
      const int c = co_nesting_count(loops, z, w);
      CHECK(c <= std::min(grid.at(cell_at(loops, z)), grid.at(cell_at(loops, w))));
    }
  }
}
