#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cle/error.hpp"
#include "cle/field_analysis.hpp"
#include "cle/greens.hpp"
#include "cle/sobolev.hpp"
#include "oracle.hpp"

using namespace cle;
using std::numbers::pi;

namespace {

Point random_in_disk(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  for (;;) {
    const Point p{u(rng), u(rng)};
    if (std::hypot(p.x, p.y) < r) return p;
  }
}

std::vector<double> random_field(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("disk Green's function") {
  CHECK(greens_disk({0, 0}, {0.5, 0}) == doctest::Approx(std::log(2.0) / (2 * pi)).epsilon(1e-12));
  CHECK(greens_disk({0, 0}, {0.5, 0}) == doctest::Approx(0.110318).epsilon(1e-6));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Point u = random_in_disk(rng, 0.99), v = random_in_disk(rng, 0.99);
    CHECK(std::abs(greens_disk(u, v) - greens_disk(v, u)) <= 1e-12);
    CHECK(greens_disk(u, v) > 0.0);
    CHECK(greens_disk({0, 0}, u) == doctest::Approx(std::log(1 / std::hypot(u.x, u.y)) / (2 * pi)));
  }
  CHECK(greens_disk({0.999, 0}, {0.2, 0.1}) < 1e-2);
  CHECK(greens_disk({0.3, 0.2}, {0, -0.999}) < 1e-2);
  CHECK_THROWS_AS(greens_disk({0.1, 0.1}, {0.1, 0.1}), SingularityError);
  CHECK_THROWS_AS(greens_disk({1.0, 0.0}, {0.1, 0.1}), DomainError);
}

TEST_CASE("Koebe bounds") {
  const auto k0 = koebe_bounds({0, 0});
  CHECK(k0.inrad == 1.0);
  CHECK(k0.confrad == 1.0);
  CHECK(k0.upper == 4.0);
  const auto k = koebe_bounds({0.5, 0});
  CHECK(k.inrad == doctest::Approx(0.5));
  CHECK(k.confrad == doctest::Approx(0.75));
  CHECK(k.upper == doctest::Approx(2.0));
  for (double x = -0.99; x < 1.0; x += 0.03)
    for (double y = -0.99; y < 1.0; y += 0.03)
      if (std::hypot(x, y) < 1.0) {
        const auto b = koebe_bounds({x, y});
        CHECK(b.inrad <= b.confrad);
        CHECK(b.confrad <= b.upper);
      }
  CHECK_THROWS_AS(koebe_bounds({0.6, 0.8}), DomainError);
}

TEST_CASE("Sobolev norms") {
  const int n = 16;
  const std::size_t m = static_cast<std::size_t>(n * n);
  const auto c = SpectralField::from_real(std::vector<double>(m, -2.5), n);
  for (double s : {-2.1, 0.0, 1.5}) CHECK(sobolev_norm(c, s) == doctest::Approx(2.5).epsilon(1e-12));

  for (auto [kx, ky] : {std::pair{3, -2}, std::pair{0, 7}, std::pair{-8, 5}}) {
    std::vector<std::complex<double>> mode(m);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        mode[static_cast<std::size_t>(j * n + i)] = std::polar(1.0, 2 * pi * (kx * i + ky * j) / n);
    const auto f = SpectralField::from_complex(mode, n);
    CHECK(std::abs(f.coefficient(kx, ky) - 1.0) <= 1e-12);
    for (double s : {-2.1, 0.5, 2.0}) {
      const double expected = std::pow(1.0 + kx * kx + ky * ky, s / 2);
      CHECK(std::abs(sobolev_norm(f, s) - expected) <= 1e-10);
    }
  }

  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto v = random_field(rng, m);
    const auto f = SpectralField::from_real(v, n);
    if (t < 10) {
      CHECK(std::abs(sobolev_norm(f, 0.0) - f.l2_norm()) <= 1e-10);
      for (int k = -3; k <= 3; ++k)
        CHECK(std::abs(f.coefficient(k, 2 * k) - std::conj(f.coefficient(-k, -2 * k))) <= 1e-12);
    }
    double prev = 0.0;
    for (double s : {-3.0, -2.1, -1.0, 0.0, 0.7, 2.0}) {
      const double norm = sobolev_norm(f, s);
      CHECK(norm >= prev);
      prev = norm;
    }
  }
  const auto v = random_field(rng, m);
  const auto cut = SpectralField::from_real(v, n, 2);
  CHECK(cut.coefficient(3, 0) == std::complex<double>(0.0));
  CHECK(sobolev_norm(cut, 0.0) < cut.l2_norm());
}

TEST_CASE("co-nesting moments") {
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(12);
  ens.replicas = 100;
  ens.seed = 3;
  const Point z{0.1, 0.05}, w{-0.3, 0.2};
  const double nu = 0.1;
  const auto m = conesting_moment_test(ens, z, w, 1, nu);
  double total = 0.0, total_oracle = 0.0;
  for_each_member(ens, [&](std::size_t, const LoopConfiguration& loops) {
    total += co_nesting_count(loops, z, w);
    total_oracle += oracle::co_nesting(loops, oracle::polygons(loops), z, w);
  });
  CHECK(m.estimate == doctest::Approx(total / 100));
  CHECK(total == total_oracle);
  CHECK(m.prediction == doctest::Approx(nu * 2 * pi * greens_disk(z, w)));
  CHECK(m.residual == doctest::Approx(m.estimate - m.prediction));
  auto few = ens;
  few.replicas = 99;
  CHECK_THROWS_AS(conesting_moment_test(few, z, w, 1, nu), InsufficientDataError);
}

TEST_CASE("log survival fit") {
  std::vector<int> geometric;
  for (int k = 0; k < 12; ++k)
    for (int i = 0; i < (4096 >> k); ++i) geometric.push_back(k);
  const auto t = log_survival_fit(geometric);
  CHECK(t.fit.slope == doctest::Approx(-std::log(2.0)).epsilon(0.05));
  CHECK(t.fit.r2 > 0.99);
  CHECK(t.k.back() == 7);
  CHECK_THROWS_AS(log_survival_fit(std::vector<int>{0, 0, 1}), InsufficientDataError);
}

TEST_CASE("covariance integral is symmetric") {
  const FieldGrid grid{6, 0.5};
  std::mt19937_64 rng(9);
  std::vector<std::vector<double>> d;
  for (int r = 0; r < 20; ++r) d.push_back(random_field(rng, grid.size()));
  const std::size_t m = grid.size();
  double direct = 0.0, transposed = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      double cab = 0.0, cba = 0.0;
      for (const auto& row : d) {
        cab += row[a] * row[b];
        cba += row[b] * row[a];
      }
      direct += std::abs(cab / 20);
      transposed += std::abs(cba / 20);
    }
  const double da = grid.cell_area();
  CHECK(std::abs(direct - transposed) * da * da <= 1e-10);
  CHECK(covariance_abs_integral(d, grid) == doctest::Approx(direct * da * da).epsilon(1e-10));
}

TEST_CASE("field difference integrand vanishes for equal scales") {
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(24);
  ens.replicas = 20;
  const FieldGrid grid{8, 0.5};
  const MuSpec mu = MuSpec::signed_bernoulli();
  std::vector<MeanTable> tables{exact_zero_table(ens.lattice, mu, 0.1, grid), exact_zero_table(ens.lattice, mu, 0.05, grid)};
  const std::vector<EpsPair> pairs{{0.1, 0.1}, {0.1, 0.05}};
  const auto res = field_diff_decay_test(ens, tables, mu, pairs, grid, 4);
  CHECK(res.points[0].integral == 0.0);
  CHECK(res.points[1].integral > 0.0);
  const std::vector<EpsPair> missing{{0.1, 0.2}};
  CHECK_THROWS_AS(field_diff_decay_test(ens, tables, mu, missing, grid, 4), CalibrationError);
}

TEST_CASE("Cauchy norms") {
  const FieldGrid grid{16, 0.5, 0.45};
  std::mt19937_64 rng(4);
  const auto a = random_field(rng, grid.size());
  const auto b = random_field(rng, grid.size());
  CHECK(cauchy_norm(a, a, grid, 0.1) == 0.0);
  std::vector<double> a3(a), b3(b);
  for (auto& x : a3) x *= 3;
  for (auto& x : b3) x *= 3;
  CHECK(cauchy_norm(a3, b3, grid, 0.1) == doctest::Approx(3 * cauchy_norm(a, b, grid, 0.1)).epsilon(1e-12));
  CHECK_THROWS_AS(cauchy_norm(a, b, FieldGrid{16, 0.5}, 0.1), ArgumentError);

  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(24);
  ens.replicas = 5;
  const MuSpec mu = MuSpec::signed_bernoulli();
  std::vector<MeanTable> tables;
  for (double e : {0.5, 0.25, 0.125}) tables.push_back(exact_zero_table(ens.lattice, mu, e, grid));
  const auto res = cauchy_diagnostic(ens, tables, mu, 0.5, 2, grid);
  CHECK(res.norms.size() == 5);
  CHECK(res.median.size() == 2);
  CHECK_THROWS_AS(cauchy_diagnostic(ens, tables, mu, 0.5, 3, grid), CalibrationError);
}

TEST_CASE("step and weighted fields agree at saturation") {
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(20);
  ens.replicas = 30;
  const FieldGrid grid{10, 0.5};
  const MuSpec mu = MuSpec::signed_bernoulli();
  std::vector<double> g(grid.size()), zero(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) g[k] = bump(grid.point(k).x, grid.point(k).y, 0.5);
  const std::vector<double> eps{0.2, 0.0};
  const std::vector<int> n{1, 1000};
  const auto gaps = fields_equal_test(ens, mu, g, eps, n, grid);
  CHECK(gaps[0].gap > 0.0);
  CHECK(gaps[1].gap == 0.0);
  const auto none = fields_equal_test(ens, mu, zero, eps, n, grid);
  CHECK(none[0].gap == 0.0);
  CHECK_THROWS_AS(fields_equal_test(ens, MuSpec::unit(), g, eps, n, grid), ArgumentError);

  const auto loops = sample_member(ens, 0);
  const auto table = exact_zero_table(ens.lattice, mu, 0.2, grid);
  const auto h = weighted_field(loops, mu, 1, 0.2, &table, grid);
  const auto step = step_nesting_field(loops, mu, 2, 2, grid);
  CHECK_THROWS_AS(pairing_gap(h, step, 2, g), ArgumentError);
  CHECK_NOTHROW(pairing_gap(h, step_nesting_field(loops, mu, 1, 2, grid), 1, g));
}
