#include "cle/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "cle/error.hpp"
#include "cle/stats.hpp"

namespace cle {
namespace {

std::uint64_t key_hash(PolyPoint key) {
  return mix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.x)) << 32) |
               static_cast<std::uint32_t>(key.y));
}

double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

MuSpec MuSpec::parse(std::string_view text) {
  MuSpec mu;
  const auto colon = text.find(':');
  const std::string_view family = text.substr(0, colon);
  if (family == "unit") {
    mu.family = WeightFamily::Unit;
  } else if (family == "bern") {
    mu.family = WeightFamily::SignedBernoulli;
  } else if (family == "gauss") {
    mu.family = WeightFamily::Gaussian;
  } else {
    throw ConfigurationError("unknown weight law '" + std::string(text) + "' (unit, bern, gauss)");
  }
  if (colon != std::string_view::npos) {
    const std::string_view rest = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), mu.scale);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || !(mu.scale > 0))
      throw ConfigurationError("bad weight scale in '" + std::string(text) + "'");
  }
  return mu;
}

std::string MuSpec::name() const {
  std::string base = family == WeightFamily::Unit ? "unit" : family == WeightFamily::SignedBernoulli ? "bern" : "gauss";
  if (scale != 1.0) base += ":" + std::to_string(scale);
  return base;
}

double loop_weight(const MuSpec& mu, std::uint64_t xi_seed, PolyPoint key) {
  const std::uint64_t h = mix64(mix64(xi_seed) ^ key_hash(key));
  switch (mu.family) {
    case WeightFamily::Unit:
      return mu.scale;
    case WeightFamily::SignedBernoulli:
      return (h >> 63) != 0 ? mu.scale : -mu.scale;
    case WeightFamily::Gaussian: {
      const double u1 = to_unit(h);
      const double u2 = to_unit(mix64(h));
      return mu.scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  return 0.0;
}

std::vector<double> loop_weights(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed) {
  std::vector<double> w;
  w.reserve(loops.loops.size());
  for (const Loop& l : loops.loops) w.push_back(loop_weight(mu, xi_seed, l.key));
  return w;
}

std::vector<double> cumulative_weights(const LoopConfiguration& loops, std::span<const double> weights) {
  const std::size_t n = loops.loops.size();
  if (weights.size() != n) throw ArgumentError("one weight per loop expected");
  std::vector<LoopIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<LoopIndex>(i);
  std::stable_sort(order.begin(), order.end(), [&](LoopIndex a, LoopIndex b) {
    return loops.loops[static_cast<std::size_t>(a)].depth < loops.loops[static_cast<std::size_t>(b)].depth;
  });
  std::vector<double> cum(n, 0.0);
  for (LoopIndex l : order) {
    const auto i = static_cast<std::size_t>(l);
    const LoopIndex p = loops.loops[i].parent;
    cum[i] = weights[i] + (p == kNoLoop ? 0.0 : cum[static_cast<std::size_t>(p)]);
  }
  return cum;
}

std::vector<LoopIndex> ball_loops(const LoopConfiguration& loops, const FieldGrid& grid, double eps) {
  if (!(eps >= 0.0)) throw ArgumentError("ball radius must be non-negative");
  const double radius = loops.lattice->radius();
  const BallProbe probe(*loops.lattice, eps * radius);
  std::vector<LoopIndex> out(grid.size(), kNoLoop);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.active(k)) continue;
    const Point z = grid.point(k);
    if (std::hypot(z.x, z.y) + eps > 1.0 + 1e-12) throw DomainError("field ball is not contained in the domain");
    out[k] = probe.enclosing_loop(loops, z.x * radius, z.y * radius);
  }
  return out;
}

namespace {

std::vector<double> sum_over(std::span<const LoopIndex> at, std::span<const double> cum) {
  std::vector<double> out(at.size(), 0.0);
  for (std::size_t k = 0; k < at.size(); ++k)
    if (at[k] != kNoLoop) out[k] = cum[static_cast<std::size_t>(at[k])];
  return out;
}

}  // namespace

WeightedFieldSample weighted_field(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed,
                                   double eps, const MeanTable* mean_table, const FieldGrid& grid,
                                   bool require_table) {
  if (require_table) {
    if (mean_table == nullptr) throw CalibrationError("weighted field needs a mean table");
    if (mean_table->eps != eps || !(mean_table->mu == mu) || !(mean_table->grid == grid) ||
        !(mean_table->lattice == loops.spec))
      throw CalibrationError("mean table was computed for a different eps, weight law, grid or lattice");
  }
  WeightedFieldSample out;
  out.eps = eps;
  out.grid = grid;
  out.mu = mu;
  out.xi_seed = xi_seed;
  const auto cum = cumulative_weights(loops, loop_weights(loops, mu, xi_seed));
  out.S = sum_over(ball_loops(loops, grid, eps), cum);
  if (mean_table != nullptr) {
    out.h.resize(out.S.size());
    for (std::size_t k = 0; k < out.S.size(); ++k) out.h[k] = out.S[k] - mean_table->mean[k];
  }
  return out;
}

std::vector<double> step_nesting_field(const LoopConfiguration& loops, const MuSpec& mu, std::uint64_t xi_seed,
                                       int n, const FieldGrid& grid) {
  if (!mu.zero_mean()) throw ArgumentError("step nesting field needs a zero-mean weight law");
  if (n < 0) throw ArgumentError("step count must be non-negative");
  const auto cum = cumulative_weights(loops, loop_weights(loops, mu, xi_seed));
  std::vector<LoopIndex> at = ball_loops(loops, grid, 0.0);
  for (LoopIndex& l : at)
    while (l != kNoLoop && loops.depth_of_loop(l) > n) l = loops.parent_of(l);
  return sum_over(at, cum);
}

std::vector<MeanTable> calibrate_means(const EnsembleSpec& calibration, const MuSpec& mu,
                                       std::span<const double> eps, const FieldGrid& grid) {
  if (calibration.replicas < 100) throw InsufficientDataError("calibration needs at least 100 replicas");
  const std::size_t m = grid.size();
  std::vector<std::vector<std::vector<double>>> samples(eps.size(), std::vector<std::vector<double>>(m));
  for (auto& per_eps : samples)
    for (auto& v : per_eps) v.reserve(calibration.replicas);
  for_each_member(calibration, [&](std::size_t r, const LoopConfiguration& loops) {
    const auto cum = cumulative_weights(loops, loop_weights(loops, mu, calibration.weight_seed(r)));
    for (std::size_t e = 0; e < eps.size(); ++e) {
      const auto s = sum_over(ball_loops(loops, grid, eps[e]), cum);
      for (std::size_t k = 0; k < m; ++k) samples[e][k].push_back(s[k]);
    }
  });
  std::vector<MeanTable> out;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    MeanTable t;
    t.lattice = calibration.lattice;
    t.mu = mu;
    t.grid = grid;
    t.eps = eps[e];
    t.replicas = calibration.replicas;
    t.seed = calibration.seed;
    t.mean.resize(m);
    t.se.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      t.mean[k] = stats::mean(samples[e][k]);
      t.se[k] = stats::standard_error(samples[e][k]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

MeanTable calibrate_mean(const EnsembleSpec& calibration, const MuSpec& mu, double eps, const FieldGrid& grid) {
  const double e[] = {eps};
  return std::move(calibrate_means(calibration, mu, e, grid).front());
}

MeanTable exact_zero_table(const LatticeSpec& lattice, const MuSpec& mu, double eps, const FieldGrid& grid) {
  if (!mu.zero_mean()) throw ArgumentError("exact centering needs a zero-mean weight law");
  MeanTable t;
  t.lattice = lattice;
  t.mu = mu;
  t.grid = grid;
  t.eps = eps;
  t.mean.assign(grid.size(), 0.0);
  t.se.assign(grid.size(), 0.0);
  return t;
}

double pair_with(std::span<const double> f, std::span<const double> g, const FieldGrid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size()) throw ArgumentError("field size does not match the grid");
  std::vector<double> prod(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) prod[k] = f[k] * g[k];
  return stats::pairwise_sum(prod) * grid.cell_area();
}

}  // namespace cle
