#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "cle/error.hpp"
#include "cle/lattice.hpp"
#include "cle/stats.hpp"

using namespace cle;

TEST_CASE("lattice spec invariants") {
  CHECK_NOTHROW(LatticeSpec::percolation(4).validate());
  CHECK_THROWS_AS(LatticeSpec::percolation(3).validate(), ConfigurationError);
  auto spec = LatticeSpec::percolation(8);
  spec.params.p = 0.6;
  CHECK_THROWS_AS(spec.validate(), ConfigurationError);
  auto fk = LatticeSpec::fk(8, 2.0);
  fk.params.p = 0.5;
  CHECK_THROWS_AS(fk.validate(), ConfigurationError);
  fk.critical = false;
  CHECK_NOTHROW(fk.validate());
  CHECK_THROWS_AS(LatticeSpec::fk(8, 2.5).validate(), ConfigurationError);
  CHECK(geometry_from_string("perc") == Geometry::TriangularSite);
  CHECK(geometry_from_string("square-fk") == Geometry::SquareFk);
  CHECK_THROWS_AS(geometry_from_string("hex"), ConfigurationError);
}

TEST_CASE("domain of a radius-4 triangular disk has 37 sites") {
  const CellLattice lat(LatticeSpec::percolation(4));
  CHECK(lat.domain_cells().size() == 37);
  for (CellIndex c : lat.domain_cells()) {
    const auto p = lat.position(c);
    CHECK(std::hypot(p[0], p[1]) <= 4.0 - 1.0 / std::sqrt(3.0) + 1e-12);
  }
}

TEST_CASE("nearest cell and neighbour tables") {
  for (auto spec : {LatticeSpec::percolation(10), LatticeSpec::fk(10, 2.0)}) {
    const CellLattice lat(spec);
    for (CellIndex c : lat.domain_cells()) {
      const auto p = lat.position(c);
      CHECK(lat.nearest_cell(p[0] + 0.05, p[1] - 0.03) == c);
      for (int k = 0; k < lat.neighbor_count(); ++k) {
        const CellIndex n = lat.neighbor(c, k);
        const auto q = lat.position(n);
        CHECK(std::hypot(q[0] - p[0], q[1] - p[1]) == doctest::Approx(lat.neighbor_spacing()));
        CHECK(lat.direction_between(lat.coord(c), lat.coord(n)) == k);
      }
    }
  }
}

TEST_CASE("percolation sampling") {
  const auto spec = LatticeSpec::percolation(64);
  const auto a = sample_percolation(spec, 11);
  const auto b = sample_percolation(spec, 11);
  CHECK(a.states == b.states);
  CHECK(a.states != sample_percolation(spec, 12).states);
  const double n = static_cast<double>(a.states.size());
  CHECK(n == CellLattice(spec).domain_cells().size());
  CHECK(std::abs(a.meta.open_fraction - 0.5) <= 4.0 * 0.5 / std::sqrt(n));
  CHECK_THROWS_AS(sample_percolation(LatticeSpec::fk(8, 2.0), 1), ConfigurationError);
}

TEST_CASE("percolation golden pattern, radius 4, seed 0") {
  const auto config = sample_percolation(LatticeSpec::percolation(4), 0);
  std::string bits;
  for (auto s : config.states) bits += static_cast<char>('0' + s);
  CHECK(bits == "0001001100010111100111010100000110111");
}

TEST_CASE("fk critical point and metadata") {
  const auto spec = LatticeSpec::fk(16, 2.0);
  CHECK(spec.params.p == doctest::Approx(0.585786).epsilon(1e-6));
  const auto config = sample_fk_ising(spec, 5, 50);
  CHECK(config.meta.p == spec.params.p);
  CHECK(config.meta.below_burn_in);
  CHECK(config.sweep_count == 50);
  CHECK(config.states.size() == static_cast<std::size_t>(BondIndex(CellLattice(spec)).size()));
  CHECK(sample_fk_ising(spec, 5, 50).states == config.states);
  CHECK_FALSE(sample_fk_ising(spec, 5, 200).meta.below_burn_in);
  CHECK_THROWS_AS(sample_fk_ising(LatticeSpec::percolation(8), 1, 10), ConfigurationError);
}

TEST_CASE("fk with q = 1 is independent bond percolation") {
  auto spec = LatticeSpec::fk(128, 1.0);
  spec.critical = false;
  spec.params.p = 0.3;
  const auto config = sample_fk_ising(spec, 9, 3);
  const double n = static_cast<double>(config.states.size());
  REQUIRE(n >= 1e5);
  const double open = config.meta.open_fraction * n;
  const double expected = spec.params.p * n;
  const double sigma = std::sqrt(n * spec.params.p * (1 - spec.params.p));
  CHECK(std::abs(open - expected) <= 4 * sigma);
  const double chi2 = (open - expected) * (open - expected) / expected +
                      (open - expected) * (open - expected) / (n - expected);
  CHECK(stats::chi_square_survival(chi2, 1.0) > 0.01);
}

TEST_CASE("bond index") {
  const CellLattice lat(LatticeSpec::fk(6, 2.0));
  const BondIndex bonds(lat);
  for (std::int32_t b = 0; b < bonds.size(); ++b) {
    const auto e = bonds.ends(b);
    CHECK(bonds.bond_between(e[0], e[1]) == b);
    CHECK(bonds.bond_between(e[1], e[0]) == b);
    CHECK(lat.in_domain(e[0]));
    CHECK(lat.in_domain(e[1]));
  }
}

TEST_CASE("fk energy autocorrelation is stable across seeds") {
  const auto spec = LatticeSpec::fk(64, 2.0);
  const double t1 = fk_energy_autocorrelation(spec, 1, 20000, 200);
  const double t2 = fk_energy_autocorrelation(spec, 2, 20000, 200);
  MESSAGE("tau_int: " << t1 << " " << t2);
  CHECK(t1 > 0.5);
  CHECK(std::abs(t1 - t2) <= 0.2 * 0.5 * (t1 + t2));
}
