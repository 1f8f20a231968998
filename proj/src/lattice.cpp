#include "cle/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cle/detail/union_find.hpp"
#include "cle/error.hpp"
#include "cle/rng.hpp"
#include "cle/stats.hpp"

namespace cle {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;

constexpr CellCoord kTriDirections[6] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
constexpr CellCoord kFkDirections[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

std::string to_string(Geometry g) {
  return g == Geometry::TriangularSite ? "triangular-site" : "square-fk";
}

Geometry geometry_from_string(std::string_view name) {
  if (name == "triangular-site" || name == "perc") return Geometry::TriangularSite;
  if (name == "square-fk" || name == "fk") return Geometry::SquareFk;
  throw ConfigurationError("unknown geometry '" + std::string(name) + "'");
}

double fk_critical_p(double q) { return 1.0 / (1.0 + 1.0 / std::sqrt(q)); }

LatticeSpec LatticeSpec::percolation(int radius_cells) {
  LatticeSpec spec;
  spec.geometry = Geometry::TriangularSite;
  spec.radius_cells = radius_cells;
  spec.params = {0.5, 1.0};
  spec.critical = true;
  return spec;
}

LatticeSpec LatticeSpec::fk(int radius_cells, double q) {
  LatticeSpec spec;
  spec.geometry = Geometry::SquareFk;
  spec.radius_cells = radius_cells;
  spec.params = {fk_critical_p(q), q};
  spec.critical = true;
  return spec;
}

void LatticeSpec::validate() const {
  if (radius_cells < 4) throw ConfigurationError("radius_cells must be >= 4");
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw ConfigurationError("p must lie in [0, 1]");
  if (geometry == Geometry::TriangularSite) {
    if (params.p != 0.5) throw ConfigurationError("triangular-site percolation requires p = 1/2");
    return;
  }
  if (!(params.q >= 1.0) || params.q != std::floor(params.q))
    throw ConfigurationError("square-fk sampling requires an integer q >= 1");
  if (critical && params.p != fk_critical_p(params.q))
    throw ConfigurationError("critical square-fk requires p = 1/(1+1/sqrt(q))");
}

CellLattice::CellLattice(const LatticeSpec& spec)
    : geometry_(spec.geometry), radius_(spec.radius_cells) {
  const double r = radius_;
  if (geometry_ == Geometry::TriangularSite) {
    const int jmax = static_cast<int>(std::ceil((r + 3.0) * 2.0 / kSqrt3));
    const int imax = static_cast<int>(std::ceil(r + 3.0 + jmax / 2.0));
    u0_ = -imax;
    v0_ = -jmax;
    width_ = 2 * imax + 1;
    height_ = 2 * jmax + 1;
  } else {
    const int m = 2 * radius_ + 5;
    u0_ = -m;
    v0_ = -m;
    width_ = 2 * m + 1;
    height_ = 2 * m + 1;
  }
  domain_.assign(static_cast<std::size_t>(size()), 0);
  // A triangular cell (a unit hexagon, circumradius 1/sqrt(3)) or a primal
  // vertex (diamond of half-diagonal 1/2) belongs to the domain when it fits
  // inside the disk.
  const double margin = geometry_ == Geometry::TriangularSite ? 1.0 / kSqrt3 : 0.5;
  auto fits = [&](CellCoord c) {
    const auto p = position(c);
    return std::hypot(p[0], p[1]) + margin <= r + 1e-12;
  };
  for (CellIndex idx = 0; idx < size(); ++idx) {
    const CellCoord c = coord(idx);
    if (geometry_ == Geometry::TriangularSite || is_primal(c))
      domain_[static_cast<std::size_t>(idx)] = fits(c) ? 1 : 0;
  }
  if (geometry_ == Geometry::SquareFk) {
    for (CellIndex idx = 0; idx < size(); ++idx) {
      const CellCoord c = coord(idx);
      if (is_primal(c)) continue;
      bool inside = true;
      for (const auto& d : kFkDirections) {
        const CellIndex n = index(c.u + d.u, c.v + d.v);
        if (n == kOutsideBox || !fits(coord(n))) inside = false;
      }
      domain_[static_cast<std::size_t>(idx)] = inside ? 1 : 0;
    }
  }
  for (CellIndex idx = 0; idx < size(); ++idx)
    if (domain_[static_cast<std::size_t>(idx)]) domain_cells_.push_back(idx);
}

CellCoord CellLattice::direction(int dir) const {
  return geometry_ == Geometry::TriangularSite ? kTriDirections[dir] : kFkDirections[dir];
}

int CellLattice::direction_between(CellCoord a, CellCoord b) const {
  const CellCoord d{b.u - a.u, b.v - a.v};
  for (int k = 0; k < neighbor_count(); ++k)
    if (direction(k) == d) return k;
  return -1;
}

std::array<double, 2> CellLattice::position(CellCoord c) const {
  if (geometry_ == Geometry::TriangularSite) return {c.u + 0.5 * c.v, 0.5 * kSqrt3 * c.v};
  const int a = c.u - c.v;
  const int b = c.u + c.v;
  return {0.5 * a, 0.5 * b};
}

std::array<double, 2> CellLattice::unit_position(CellIndex idx) const {
  const auto p = position(idx);
  return {p[0] / radius_, p[1] / radius_};
}

CellIndex CellLattice::nearest_cell(double x, double y) const {
  int cu, cv;
  if (geometry_ == Geometry::TriangularSite) {
    cv = static_cast<int>(std::lround(y / (0.5 * kSqrt3)));
    cu = static_cast<int>(std::lround(x - 0.5 * cv));
  } else {
    cu = static_cast<int>(std::lround(x + y));
    cv = static_cast<int>(std::lround(y - x));
  }
  CellCoord best = {cu, cv};
  double best_d = std::numeric_limits<double>::infinity();
  for (int du = -1; du <= 1; ++du) {
    for (int dv = -1; dv <= 1; ++dv) {
      const CellCoord c{cu + du, cv + dv};
      const auto p = position(c);
      const double d = std::hypot(p[0] - x, p[1] - y);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = c;
      }
    }
  }
  return index(best);
}

bool CellLattice::is_primal(CellCoord c) const {
  if (geometry_ == Geometry::TriangularSite) return true;
  return ((c.u - c.v) & 1) == 0;
}

PolyPoint CellLattice::polygon_point(CellCoord c) const {
  if (geometry_ == Geometry::TriangularSite) return {3 * c.u, 3 * c.v};
  return {2 * (c.u - c.v), 2 * (c.u + c.v)};
}

std::array<double, 2> CellLattice::polygon_to_euclid(PolyPoint p) const {
  if (geometry_ == Geometry::TriangularSite)
    return {(p.x + 0.5 * p.y) / 3.0, 0.5 * kSqrt3 * p.y / 3.0};
  return {p.x / 4.0, p.y / 4.0};
}

double CellLattice::neighbor_spacing() const {
  return geometry_ == Geometry::TriangularSite ? 1.0 : std::sqrt(0.5);
}

BondIndex::BondIndex(const CellLattice& lattice) : lattice_(&lattice) {
  plus_x_.assign(static_cast<std::size_t>(lattice.size()), -1);
  plus_y_.assign(static_cast<std::size_t>(lattice.size()), -1);
  if (lattice.geometry() != Geometry::SquareFk) return;
  for (CellIndex idx : lattice.domain_cells()) {
    const CellCoord c = lattice.coord(idx);
    if (!lattice.is_primal(c)) continue;
    const CellIndex right = lattice.index(c.u + 1, c.v - 1);
    if (lattice.in_domain(right)) {
      plus_x_[static_cast<std::size_t>(idx)] = size();
      ends_.push_back({idx, right});
    }
    const CellIndex up = lattice.index(c.u + 1, c.v + 1);
    if (lattice.in_domain(up)) {
      plus_y_[static_cast<std::size_t>(idx)] = size();
      ends_.push_back({idx, up});
    }
  }
}

std::int32_t BondIndex::bond_between(CellIndex a, CellIndex b) const {
  if (a < 0 || b < 0) return -1;
  const CellCoord ca = lattice_->coord(a);
  const CellCoord cb = lattice_->coord(b);
  const int du = cb.u - ca.u;
  const int dv = cb.v - ca.v;
  if (du == 1 && dv == -1) return plus_x_[static_cast<std::size_t>(a)];
  if (du == -1 && dv == 1) return plus_x_[static_cast<std::size_t>(b)];
  if (du == 1 && dv == 1) return plus_y_[static_cast<std::size_t>(a)];
  if (du == -1 && dv == -1) return plus_y_[static_cast<std::size_t>(b)];
  return -1;
}

SiteConfiguration sample_percolation(const LatticeSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.geometry != Geometry::TriangularSite)
    throw ConfigurationError("sample_percolation requires triangular-site geometry");
  const CellLattice lattice(spec);
  SiteConfiguration config;
  config.spec = spec;
  config.seed = seed;
  const std::size_t n = lattice.domain_cells().size();
  config.states.resize(n);
  Engine engine = make_engine(seed);
  std::uint64_t word = 0;
  std::size_t open = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 64 == 0) word = engine();
    config.states[k] = static_cast<std::uint8_t>((word >> (k % 64)) & 1U);
    open += config.states[k];
  }
  config.meta.p = 0.5;
  config.meta.q = 1.0;
  config.meta.open_fraction = n ? static_cast<double>(open) / static_cast<double>(n) : 0.0;
  config.meta.boundary_note = "sites outside the lattice disk are closed; all interfaces close inside";
  return config;
}

namespace {

// Runs Swendsen-Wang sweeps in place and optionally records the open-bond
// count after each sweep.
void swendsen_wang(const CellLattice& lattice, const BondIndex& bonds, double p, int q,
                   int sweeps, Engine& engine, std::vector<std::uint8_t>& state,
                   std::vector<double>* energy) {
  std::vector<CellIndex> primal;
  std::vector<std::int32_t> compact(static_cast<std::size_t>(lattice.size()), -1);
  for (CellIndex idx : lattice.domain_cells()) {
    if (!lattice.is_primal(lattice.coord(idx))) continue;
    compact[static_cast<std::size_t>(idx)] = static_cast<std::int32_t>(primal.size());
    primal.push_back(idx);
  }
  std::vector<std::array<std::int32_t, 2>> ends(static_cast<std::size_t>(bonds.size()));
  for (std::int32_t b = 0; b < bonds.size(); ++b) {
    const auto e = bonds.ends(b);
    ends[static_cast<std::size_t>(b)] = {compact[static_cast<std::size_t>(e[0])], compact[static_cast<std::size_t>(e[1])]};
  }
  std::vector<std::int32_t> colour(primal.size());
  std::vector<std::int32_t> spin(primal.size());
  for (int s = 0; s < sweeps; ++s) {
    detail::UnionFind uf(primal.size());
    for (std::size_t b = 0; b < ends.size(); ++b)
      if (state[b]) uf.unite(ends[b][0], ends[b][1]);
    std::fill(colour.begin(), colour.end(), -1);
    for (std::size_t i = 0; i < primal.size(); ++i) {
      const auto root = static_cast<std::size_t>(uf.find(static_cast<std::int32_t>(i)));
      if (colour[root] < 0)
        colour[root] = q == 1 ? 0 : static_cast<std::int32_t>(uniform01(engine) * q);
      spin[i] = colour[root];
    }
    std::size_t open = 0;
    for (std::size_t b = 0; b < ends.size(); ++b) {
      const bool same = spin[static_cast<std::size_t>(ends[b][0])] == spin[static_cast<std::size_t>(ends[b][1])];
      state[b] = static_cast<std::uint8_t>(same && uniform01(engine) < p);
      open += state[b];
    }
    if (energy) energy->push_back(static_cast<double>(open));
  }
}

std::vector<std::uint8_t> independent_bonds(std::int32_t count, double p, Engine& engine) {
  std::vector<std::uint8_t> state(static_cast<std::size_t>(count));
  for (auto& s : state) s = static_cast<std::uint8_t>(uniform01(engine) < p);
  return state;
}

}  // namespace

SiteConfiguration sample_fk_ising(const LatticeSpec& spec, std::uint64_t seed, int sweeps,
                                  FkOptions options) {
  spec.validate();
  if (spec.geometry != Geometry::SquareFk)
    throw ConfigurationError("sample_fk_ising requires square-fk geometry");
  if (sweeps < 0) throw ConfigurationError("sweeps must be non-negative");
  const CellLattice lattice(spec);
  const BondIndex bonds(lattice);
  Engine engine = make_engine(seed);
  SiteConfiguration config;
  config.spec = spec;
  config.seed = seed;
  config.sweep_count = sweeps;
  config.states = independent_bonds(bonds.size(), spec.params.p, engine);
  std::vector<double> energy;
  swendsen_wang(lattice, bonds, spec.params.p, static_cast<int>(spec.params.q), sweeps, engine,
                config.states, options.measure_autocorrelation ? &energy : nullptr);
  std::size_t open = 0;
  for (auto s : config.states) open += s;
  config.meta.p = spec.params.p;
  config.meta.q = spec.params.q;
  config.meta.sweeps = sweeps;
  config.meta.burn_in = options.burn_in;
  config.meta.below_burn_in = sweeps < options.burn_in;
  config.meta.open_fraction =
      bonds.size() ? static_cast<double>(open) / static_cast<double>(bonds.size()) : 0.0;
  if (options.measure_autocorrelation && sweeps > options.burn_in + 10) {
    const std::span<const double> tail(energy.data() + options.burn_in, energy.size() - static_cast<std::size_t>(options.burn_in));
    config.meta.energy_tau_int = stats::integrated_autocorrelation_time(tail);
  }
  config.meta.boundary_note = "bonds leaving the lattice disk are absent (wired dual); all interfaces close inside";
  return config;
}

std::vector<double> fk_energy_series(const LatticeSpec& spec, std::uint64_t seed, int sweeps) {
  spec.validate();
  if (spec.geometry != Geometry::SquareFk)
    throw ConfigurationError("fk_energy_series requires square-fk geometry");
  const CellLattice lattice(spec);
  const BondIndex bonds(lattice);
  Engine engine = make_engine(seed);
  auto state = independent_bonds(bonds.size(), spec.params.p, engine);
  std::vector<double> energy;
  energy.reserve(static_cast<std::size_t>(sweeps));
  swendsen_wang(lattice, bonds, spec.params.p, static_cast<int>(spec.params.q), sweeps, engine, state,
                &energy);
  return energy;
}

double fk_energy_autocorrelation(const LatticeSpec& spec, std::uint64_t seed, int sweeps,
                                 int burn_in) {
  const auto series = fk_energy_series(spec, seed, sweeps);
  if (static_cast<int>(series.size()) <= burn_in + 10)
    throw ArgumentError("too few sweeps after burn-in to measure autocorrelation");
  return stats::integrated_autocorrelation_time(
      std::span<const double>(series).subspan(static_cast<std::size_t>(burn_in)));
}

}  // namespace cle
