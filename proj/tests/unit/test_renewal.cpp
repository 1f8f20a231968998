#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <numbers>

#include "cle/error.hpp"
#include "cle/renewal.hpp"
#include "cle/stats.hpp"

using namespace cle;
using std::numbers::pi;

TEST_CASE("closed-form moment generating functions") {
  const auto e = IncrementDistribution::exponential(1.0);
  for (double l : {-1.0, 0.0, 0.3, 0.9}) CHECK(e.log_mgf(l) == doctest::Approx(-std::log(1 - l)));
  CHECK(e.log_mgf_derivative_at_zero() == 1.0);
  CHECK(e.typical_nesting_constant() == 1.0);
  CHECK_THROWS_AS(e.mgf(1.0), DomainError);
  const auto g = IncrementDistribution::gamma(2.0, 1.0);
  CHECK(g.log_mgf_derivative_at_zero() == 2.0);
  CHECK(g.mgf(0.5) == doctest::Approx(4.0));
}

TEST_CASE("ssw law") {
  for (double kappa : {6.0, 16.0 / 3.0}) {
    const auto d = IncrementDistribution::ssw_cle(kappa);
    CHECK(d.lambda0() == doctest::Approx(1 - 2 / kappa - 3 * kappa / 32));
    CHECK(d.mgf(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(d.mgf(d.lambda0()), DomainError);
    // The moment generating function blows up at lambda0.
    CHECK(d.mgf(d.lambda0() - 1e-6) > 1e3);
    const double a = std::abs(1 - 4 / kappa);
    const double exact = pi * std::tan(pi * a) * 4 / (kappa * a);
    CHECK(d.log_mgf_derivative_at_zero() == doctest::Approx(exact).epsilon(1e-7));
    Engine engine = make_engine(5);
    std::vector<double> x(200000);
    for (auto& v : x) {
      v = d.sample(engine);
      CHECK_FALSE(v <= 0.0);
    }
    CHECK(std::abs(stats::mean(x) - d.log_mgf_derivative_at_zero()) <= 4 * stats::standard_error(x));
    CHECK(stats::variance(x) == doctest::Approx(d.log_mgf_second_derivative_at_zero()).epsilon(0.03));
  }
  CHECK(IncrementDistribution::ssw_cle(6.0).typical_nesting_constant() ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(3.0) * pi)).epsilon(1e-7));
}

TEST_CASE("monte carlo moment generating function within 3 SE") {
  for (const auto& d : {IncrementDistribution::exponential(1.0), IncrementDistribution::gamma(2.0, 1.0),
                        IncrementDistribution::ssw_cle(6.0)}) {
    const double lambda = d.lambda0() / 3.0;
    Engine engine = make_engine(17);
    std::vector<double> v(200000);
    for (auto& y : v) y = std::exp(lambda * d.sample(engine));
    CHECK(std::abs(stats::mean(v) - d.mgf(lambda)) <= 3 * stats::standard_error(v));
  }
}

TEST_CASE("empirical law and parsing") {
  const auto d = IncrementDistribution::empirical({1.0});
  CHECK(d.log_mgf_derivative_at_zero() == 1.0);
  CHECK(d.mgf(2.0) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(IncrementDistribution::empirical({1.0, 0.0}), ArgumentError);
  CHECK(IncrementDistribution::parse("gamma:2:1").log_mgf_derivative_at_zero() == 2.0);
  CHECK(IncrementDistribution::parse("ssw:6").family() == IncrementFamily::SswCle);
  CHECK_THROWS_AS(IncrementDistribution::parse("weibull"), ConfigurationError);
}

TEST_CASE("first passage") {
  const auto e = IncrementDistribution::exponential(1.0);
  const auto zero = first_passage(e, 0.0, 1);
  CHECK(zero.tau == 0);
  CHECK(zero.overshoot == 0.0);
  const auto unit = first_passage(IncrementDistribution::empirical({1.0}), 2.5, 1);
  CHECK(unit.tau == 3);
  CHECK(unit.overshoot == doctest::Approx(0.5));
  CHECK_THROWS_AS(first_passage(e, -1.0, 1), ArgumentError);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto fp = first_passage(e, 7.0, seed);
    const auto& s = fp.path.partial_sums;
    CHECK(s.front() == 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    CHECK(s[static_cast<std::size_t>(fp.tau) - 1] < 7.0);
    CHECK(s[static_cast<std::size_t>(fp.tau)] >= 7.0);
    // tau_x is nondecreasing in x along one path.
    std::int64_t prev = 0;
    for (double x = 0.0; x <= 7.0; x += 0.25) {
      std::int64_t t = 0;
      while (s[static_cast<std::size_t>(t)] < x) ++t;
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("exponential passage time mean") {
  const auto e = IncrementDistribution::exponential(1.0);
  Engine engine = make_engine(3);
  std::vector<double> tau(200000);
  for (auto& t : tau) t = static_cast<double>(first_passage_summary(e, 10.0, engine).tau);
  CHECK(std::abs(stats::mean(tau) - 11.0) <= 3 * stats::standard_error(tau));
}

TEST_CASE("overshoot tail") {
  const auto e = IncrementDistribution::exponential(1.0);
  const std::vector<double> alpha{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  const auto curve = overshoot_tail_estimate(e, 10.0, alpha, 100000, 4);
  CHECK(curve[0].survival == 1.0);
  for (const auto& p : curve) CHECK(p.band.contains(std::exp(-p.alpha)));
  CHECK_THROWS_AS(overshoot_tail_estimate(e, 10.0, alpha, 9999, 4), ArgumentError);

  const auto g = IncrementDistribution::gamma(2.0, 1.0);
  const std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const auto gc = overshoot_tail_estimate(g, 20.0, grid, 100000, 5);
  std::vector<double> x, y;
  for (const auto& p : gc) {
    x.push_back(p.alpha);
    y.push_back(std::log(p.survival));
  }
  const auto fit = stats::fit_line(x, y);
  CHECK(fit.slope < 0);
  CHECK(fit.r2 >= 0.9);
}

TEST_CASE("tau moment expansion") {
  const auto e = IncrementDistribution::exponential(1.0);
  const std::vector<double> xs{0.0, 5.0, 10.0};
  const auto t1 = tau_moment_check(e, xs, 1, 100000, 8);
  CHECK(t1.rows[0].residual == 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(std::abs(t1.rows[i].residual - 1.0) <= 3 * t1.rows[i].se);
  const std::vector<double> grid{5.0, 10.0, 20.0, 40.0};
  const auto t2 = tau_moment_check(e, grid, 2, 100000, 9);
  CHECK(t2.growth.slope >= 0.8);
  CHECK(t2.growth.slope <= 1.2);
  CHECK_THROWS_AS(tau_moment_check(e, grid, 4, 100, 1), ArgumentError);
  const std::vector<double> bad{5.0, 4.0};
  CHECK_THROWS_AS(tau_moment_check(e, bad, 1, 100, 1), ArgumentError);
}

TEST_CASE("coalescing coupling basics") {
  const auto e = IncrementDistribution::exponential(1.0);
  const auto same = coalescing_coupling(e, 1.0, 1.0, 5.0, 3, {0.35, 0});
  CHECK(same.coalesced);
  CHECK(same.coalesce_height == 1.0);
  CHECK(same.path_a.partial_sums == same.path_b.partial_sums);
  CHECK_THROWS_AS(coalescing_coupling(IncrementDistribution::empirical({1.0}), 0, 0.5, 5, 1), UnsupportedDistributionError);
  CHECK_THROWS_AS(coalescing_coupling(e, 0.6, 0.5, 5, 1), ArgumentError);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = coalescing_coupling(e, 0.0, 0.5, 10.0, seed, {0.35, 0});
    for (const auto* p : {&r.path_a, &r.path_b})
      for (std::size_t i = 1; i < p->partial_sums.size(); ++i) CHECK(p->partial_sums[i] > p->partial_sums[i - 1]);
    if (r.coalesced) {
      // Absorbency: from the merge height on, both paths coincide exactly.
      const auto& sa = r.path_a.partial_sums;
      const auto& sb = r.path_b.partial_sums;
      const auto ia = std::find(sa.begin(), sa.end(), *r.coalesce_height) - sa.begin();
      const auto ib = std::find(sb.begin(), sb.end(), *r.coalesce_height) - sb.begin();
      REQUIRE(ia < static_cast<std::ptrdiff_t>(sa.size()));
      REQUIRE(ib < static_cast<std::ptrdiff_t>(sb.size()));
      CHECK(std::equal(sa.begin() + ia, sa.end(), sb.begin() + ib, sb.end()));
    }
  }
}

TEST_CASE("maximal coupling success rate equals the overlap") {
  const auto e = IncrementDistribution::exponential(1.0);
  for (double gap : {0.1, 0.3, 1.0}) {
    Engine engine = make_engine(21);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const auto [x, y] = maximal_coupling(e, 0.0, gap, engine);
      hits += x == y ? 1 : 0;
    }
    const double p = std::exp(-gap);
    CHECK(coupling_overlap(e, gap) == doctest::Approx(p));
    CHECK(std::abs(hits / double(n) - p) <= 3 * std::sqrt(p * (1 - p) / n));
  }
  // Quadrature agrees with the closed form of the gamma(2,1) overlap:
  // 2 P[Gamma(2,1) > t] evaluated at the crossing point t = g / (1 - e^-g).
  const auto g = IncrementDistribution::gamma(2.0, 1.0);
  const double gap = 0.5;
  const double t = gap / (1 - std::exp(-gap));
  const double tail = [](double s) { return (1 + s) * std::exp(-s); }(t);
  const double head = [](double s) { return 1 - (1 + s) * std::exp(-s); }(t - gap);
  CHECK(coupling_overlap(g, gap) == doctest::Approx(tail + head).epsilon(1e-6));
}

TEST_CASE("coupled marginals are the increment law") {
  const auto e = IncrementDistribution::exponential(1.0);
  CouplingOptions opts{0.35, 10};
  std::vector<double> coupled_a, coupled_b;
  for (std::uint64_t t = 0; t < 3000; ++t) {
    const auto r = coalescing_coupling(e, 0.0, 0.5, 5.0, derive_seed(1, "ks", t), opts);
    for (std::size_t i = 0; i < 10; ++i) {
      coupled_a.push_back(r.path_a.increments[i]);
      coupled_b.push_back(r.path_b.increments[i]);
    }
  }
  Engine engine = make_engine(2);
  std::vector<double> direct(30000);
  for (auto& x : direct) x = e.sample(engine);
  const auto ka = stats::ks_two_sample(coupled_a, direct);
  const auto kb = stats::ks_two_sample(coupled_b, direct);
  CHECK(ka.statistic < ka.critical_1pct);
  CHECK(kb.statistic < kb.critical_1pct);
  const auto exp_cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
  CHECK(stats::ks_one_sample(coupled_a, exp_cdf).statistic < stats::ks_one_sample(coupled_a, exp_cdf).critical_1pct);
  CHECK(stats::ks_one_sample(coupled_b, exp_cdf).p_value > 0.01);
}

TEST_CASE("one-sample KS") {
  const auto exp_cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
  CHECK(stats::ks_one_sample({0.5}, exp_cdf).statistic == doctest::Approx(std::max(exp_cdf(0.5), 1 - exp_cdf(0.5))));
  Engine engine = make_engine(9);
  std::vector<double> good(20000), shifted(20000);
  for (auto& x : good) x = std::exponential_distribution<double>(1.0)(engine);
  for (auto& x : shifted) x = 0.05 + std::exponential_distribution<double>(1.0)(engine);
  const auto g = stats::ks_one_sample(good, exp_cdf);
  CHECK(g.p_value > 0.01);
  CHECK(g.critical_1pct == doctest::Approx(1.628 / std::sqrt(20000.0)));
  CHECK(stats::ks_one_sample(shifted, exp_cdf).p_value < 1e-6);
  CHECK_THROWS(stats::ks_one_sample({}, exp_cdf));
}

TEST_CASE("forced-failure estimator agrees with direct counting") {
  const auto e = IncrementDistribution::exponential(1.0);
  const auto est = estimate_non_coalescence(e, 0.0, 0.5, 5.0, 40000, 6, 0.35);
  CHECK(std::abs(est.direct - est.weighted) <= 3 * std::hypot(est.direct_se, est.weighted_se));
  CHECK(est.direct > 0.05);
}
