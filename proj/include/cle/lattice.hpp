#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cle {

enum class Geometry : std::uint8_t { TriangularSite = 0, SquareFk = 1 };

std::string to_string(Geometry g);
Geometry geometry_from_string(std::string_view name);

struct ModelParams {
  double p = 0.5;
  double q = 1.0;  // FK cluster weight; unused for site percolation
  bool operator==(const ModelParams&) const = default;
};

// A lattice disk of radius `radius_cells` (lattice spacing 1) centred at the
// origin. Every site outside the disk is closed (percolation) and every bond
// leaving it is absent, i.e. the dual is wired (FK).
struct LatticeSpec {
  Geometry geometry = Geometry::TriangularSite;
  int radius_cells = 16;
  ModelParams params;
  bool critical = true;

  static LatticeSpec percolation(int radius_cells);
  static LatticeSpec fk(int radius_cells, double q);

  // Throws ConfigurationError when an invariant is violated.
  void validate() const;

  bool operator==(const LatticeSpec&) const = default;
};

// p = 1 / (1 + 1/sqrt(q)).
double fk_critical_p(double q);

struct CellCoord {
  int u = 0;
  int v = 0;
  bool operator==(const CellCoord&) const = default;
};

using CellIndex = std::int32_t;
inline constexpr CellIndex kOutsideBox = -1;

// Integer point in the coordinate system used for loop polygon vertices.
struct PolyPoint {
  std::int32_t x = 0;
  std::int32_t y = 0;
  bool operator==(const PolyPoint&) const = default;
  auto operator<=>(const PolyPoint&) const = default;
};

// The faces of the loop arrangement ("cells") stored in a rectangular box of
// integer coordinates (u, v).
//
// triangular-site: a cell is a site of the triangular lattice, Euclidean
//   position (u + v/2, v*sqrt(3)/2); six neighbours. Polygon coordinates are
//   3*(u, v) in the same skewed frame, so honeycomb vertices (triangle
//   centroids) are integral.
// square-fk: cells are the primal vertices and the dual vertices together,
//   i.e. the faces of the medial lattice. With a = u - v, b = u + v the
//   Euclidean position is (a/2, b/2); a even marks a primal vertex. The four
//   neighbours (u+-1, v), (u, v+-1) are always of the opposite type. Polygon
//   coordinates are 2*(a, b) (quarter units), so medial-edge midpoints are
//   integral.
class CellLattice {
 public:
  explicit CellLattice(const LatticeSpec& spec);

  Geometry geometry() const { return geometry_; }
  int radius() const { return radius_; }
  int neighbor_count() const { return geometry_ == Geometry::TriangularSite ? 6 : 4; }
  int width() const { return width_; }
  int height() const { return height_; }
  CellIndex size() const { return static_cast<CellIndex>(width_) * height_; }

  CellIndex index(int u, int v) const {
    const int x = u - u0_;
    const int y = v - v0_;
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return kOutsideBox;
    return static_cast<CellIndex>(y) * width_ + x;
  }
  CellIndex index(CellCoord c) const { return index(c.u, c.v); }
  CellCoord coord(CellIndex idx) const { return {idx % width_ + u0_, idx / width_ + v0_}; }

  bool in_domain(CellIndex idx) const { return idx >= 0 && domain_[static_cast<std::size_t>(idx)] != 0; }

  // Neighbour directions in counterclockwise order.
  CellCoord direction(int dir) const;
  CellIndex neighbor(CellIndex idx, int dir) const {
    const CellCoord c = coord(idx);
    const CellCoord d = direction(dir);
    return index(c.u + d.u, c.v + d.v);
  }
  // Direction index k with b = a + direction(k), or -1.
  int direction_between(CellCoord a, CellCoord b) const;

  std::array<double, 2> position(CellCoord c) const;
  std::array<double, 2> position(CellIndex idx) const { return position(coord(idx)); }

  // Position divided by the radius: the lattice disk rescaled to the unit disk.
  std::array<double, 2> unit_position(CellIndex idx) const;

  // Cell whose centre is nearest to a Euclidean point (lattice units); may be
  // kOutsideBox.
  CellIndex nearest_cell(double x, double y) const;
  CellIndex nearest_cell_unit(double x, double y) const {
    return nearest_cell(x * radius_, y * radius_);
  }
  CellIndex center() const { return index(0, 0); }

  // FK: true for primal vertices. Always true for triangular-site.
  bool is_primal(CellCoord c) const;

  PolyPoint polygon_point(CellCoord c) const;
  std::array<double, 2> polygon_to_euclid(PolyPoint p) const;

  // Cells inside the domain, increasing index. This is the canonical order of
  // the per-site state bits for percolation.
  const std::vector<CellIndex>& domain_cells() const { return domain_cells_; }

  // Distance between touching cells.
  double neighbor_spacing() const;

 private:
  Geometry geometry_;
  int radius_;
  int u0_ = 0, v0_ = 0, width_ = 0, height_ = 0;
  std::vector<std::uint8_t> domain_;
  std::vector<CellIndex> domain_cells_;
};

// The primal bonds of a square-fk lattice: edges between primal domain
// vertices, in canonical order (by lower endpoint cell index; the +x bond
// before the +y bond).
class BondIndex {
 public:
  explicit BondIndex(const CellLattice& lattice);

  std::int32_t size() const { return static_cast<std::int32_t>(ends_.size()); }
  std::array<CellIndex, 2> ends(std::int32_t bond) const { return ends_[static_cast<std::size_t>(bond)]; }
  // Bond between two primal cells two half-steps apart, or -1.
  std::int32_t bond_between(CellIndex a, CellIndex b) const;

 private:
  const CellLattice* lattice_;
  std::vector<std::array<CellIndex, 2>> ends_;
  std::vector<std::int32_t> plus_x_;  // per cell
  std::vector<std::int32_t> plus_y_;
};

struct SamplerMetadata {
  double p = 0;
  double q = 0;
  int sweeps = 0;
  int burn_in = 0;
  bool below_burn_in = false;
  double open_fraction = 0;
  double energy_tau_int = 0;  // 0 when not measured
  std::string boundary_note;
};

// States are one byte (0/1) per domain site (triangular-site) or per bond
// (square-fk), in the canonical order of CellLattice / BondIndex.
struct SiteConfiguration {
  LatticeSpec spec;
  std::uint64_t seed = 0;
  int sweep_count = 0;
  std::vector<std::uint8_t> states;
  SamplerMetadata meta;
};

SiteConfiguration sample_percolation(const LatticeSpec& spec, std::uint64_t seed);

struct FkOptions {
  int burn_in = 200;
  bool measure_autocorrelation = false;
};

// Swendsen-Wang dynamics for integer q, started from independent bonds.
SiteConfiguration sample_fk_ising(const LatticeSpec& spec, std::uint64_t seed, int sweeps,
                                  FkOptions options = {});

// Open-bond counts after each sweep (length `sweeps`).
std::vector<double> fk_energy_series(const LatticeSpec& spec, std::uint64_t seed, int sweeps);

// Integrated autocorrelation time of the open-bond count, measured on the
// sweeps after burn_in.
double fk_energy_autocorrelation(const LatticeSpec& spec, std::uint64_t seed, int sweeps,
                                 int burn_in);

}  // namespace cle
