#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cle/ensemble.hpp"
#include "cle/topology.hpp"

namespace cle {

// Law of the i.i.d. loop weights.
enum class WeightFamily { Unit, SignedBernoulli, Gaussian };

struct MuSpec {
  WeightFamily family = WeightFamily::Unit;
  double scale = 1.0;  // multiplies every weight

  static MuSpec unit() { return {}; }
  static MuSpec signed_bernoulli() { return {WeightFamily::SignedBernoulli, 1.0}; }
  static MuSpec gaussian() { return {WeightFamily::Gaussian, 1.0}; }
  // "unit", "bern", "gauss", optionally followed by ":SCALE".
  static MuSpec parse(std::string_view text);

  double mean() const { return family == WeightFamily::Unit ? scale : 0.0; }
  double variance() const { return family == WeightFamily::Unit ? 0.0 : scale * scale; }
  bool zero_mean() const { return mean() == 0.0; }
  std::string name() const;

  bool operator==(const MuSpec&) const = default;
};

// xi for the loop with the given key; a pure function of (mu, xi_seed, key).
double loop_weight(const MuSpec& mu, std::uint64_t xi_seed, PolyPoint key);
std::vector<double> loop_weights(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed);

// Sum of the weights of a loop and all loops enclosing it.
std::vector<double> cumulative_weights(const LoopConfiguration& loops, std::span<const double> weights);

// n x n cell-centred evaluation points covering [-half_width, half_width]^2 in
// unit-disk coordinates, row-major with x fastest. Points at distance
// support_radius or more from the origin are inactive; fields vanish there.
struct FieldGrid {
  int n = 32;
  double half_width = 0.5;
  double support_radius = 2.0;

  std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  double spacing() const { return 2.0 * half_width / n; }
  double cell_area() const { return spacing() * spacing(); }
  Point point(std::size_t k) const {
    const auto i = static_cast<int>(k % static_cast<std::size_t>(n));
    const auto j = static_cast<int>(k / static_cast<std::size_t>(n));
    return {-half_width + (i + 0.5) * spacing(), -half_width + (j + 0.5) * spacing()};
  }
  bool active(std::size_t k) const {
    const Point z = point(k);
    return z.x * z.x + z.y * z.y < support_radius * support_radius;
  }
  bool operator==(const FieldGrid&) const = default;
};

// Deepest loop surrounding B(z, eps) for every active grid point (kNoLoop
// where none, and at inactive points). eps = 0 gives the innermost loop around
// z. Throws DomainError if a ball leaves the disk.
std::vector<LoopIndex> ball_loops(const LoopConfiguration& loops, const FieldGrid& grid, double eps);

// Monte Carlo estimate of E[S_z(eps)] on a grid.
struct MeanTable {
  LatticeSpec lattice;
  MuSpec mu;
  FieldGrid grid;
  double eps = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<double> mean;
  std::vector<double> se;
};

struct WeightedFieldSample {
  double eps = 0;
  FieldGrid grid;
  MuSpec mu;
  std::uint64_t xi_seed = 0;
  std::vector<double> S;
  std::vector<double> h;  // S - mean table; empty when no table was given
};

// S_z(eps) = sum of xi over loops surrounding B(z, eps), and h = S - E[S]
// from the table. Throws CalibrationError when the table is missing or was
// computed for a different eps, lattice, weight law or grid; pass
// require_table = false to get S alone.
WeightedFieldSample weighted_field(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed,
                                   double eps, const MeanTable* mean_table, const FieldGrid& grid = {},
                                   bool require_table = true);

// Sum of xi over the n outermost loops surrounding each grid point. Throws
// ArgumentError when mu does not have mean zero.
std::vector<double> step_nesting_field(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed,
                                       int n, const FieldGrid& grid = {});

// Tables for several eps from one calibration ensemble; needs >= 100 replicas.
std::vector<MeanTable> calibrate_means(const EnsembleSpec& calibration, const MuSpec& mu,
                                       std::span<const double> eps, const FieldGrid& grid = {});
MeanTable calibrate_mean(const EnsembleSpec& calibration, const MuSpec& mu, double eps,
                         const FieldGrid& grid = {});

// The exact table E[S] = 0 of a zero-mean weight law (replicas = 0). Throws
// ArgumentError for other laws.
MeanTable exact_zero_table(const LatticeSpec& lattice, const MuSpec& mu, double eps, const FieldGrid& grid = {});

// Grid pairing <f, g> = sum f g dA.
double pair_with(std::span<const double> f, std::span<const double> g, const FieldGrid& grid);

}  // namespace cle
