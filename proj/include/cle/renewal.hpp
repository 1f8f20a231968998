#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cle/rng.hpp"
#include "cle/stats.hpp"

namespace cle {

enum class IncrementFamily { Exponential, Gamma, SswCle, Empirical };

// A law of strictly positive i.i.d. increments. Immutable; copies share state.
class IncrementDistribution {
 public:
  static IncrementDistribution exponential(double rate);
  static IncrementDistribution gamma(double shape, double rate);
  // Log conformal radius decrement between successive loops of CLE_kappa
  // around a point, 8/3 < kappa <= 8.
  static IncrementDistribution ssw_cle(double kappa);
  static IncrementDistribution empirical(std::vector<double> samples);
  // "exp", "exp:RATE", "gamma", "gamma:SHAPE:RATE", "ssw:KAPPA".
  static IncrementDistribution parse(std::string_view text);

  IncrementFamily family() const;
  std::string name() const;

  // Supremum of lambda with a finite moment generating function.
  double lambda0() const;
  bool has_density() const;
  // Throws UnsupportedDistributionError without a density.
  double density(double x) const;
  double sample(Engine& engine) const;

  // E[exp(lambda X)]; DomainError for lambda >= lambda0.
  double mgf(double lambda) const;
  double log_mgf(double lambda) const { return std::log(mgf(lambda)); }
  // Lambda'(0) = E[X].
  double log_mgf_derivative_at_zero() const;
  // Lambda''(0) = Var[X].
  double log_mgf_second_derivative_at_zero() const;
  // nu = 1 / Lambda'(0).
  double typical_nesting_constant() const { return 1.0 / log_mgf_derivative_at_zero(); }

  struct Impl;

 private:
  explicit IncrementDistribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// Closed-form SSW quantities, used to cross-check the numeric ones.
double ssw_mgf(double kappa, double lambda);
double ssw_lambda0(double kappa);

struct RenewalPath {
  std::vector<double> increments;
  std::vector<double> partial_sums;  // S_0 = start, ..., one entry more than increments
  std::uint64_t seed = 0;
};

struct FirstPassage {
  std::int64_t tau = 0;
  double overshoot = 0;
  RenewalPath path;
};

// tau_x = inf{n >= 0 : S_n >= x} and the overshoot S_tau - x.
FirstPassage first_passage(const IncrementDistribution& dist, double x, std::uint64_t seed);

// The same without recording the path; consumes engine draws.
struct PassageSummary {
  std::int64_t tau = 0;
  double overshoot = 0;
};
PassageSummary first_passage_summary(const IncrementDistribution& dist, double x, Engine& engine);

struct SurvivalPoint {
  double alpha = 0;
  double survival = 0;
  stats::Interval band;
};

// Empirical P[overshoot >= alpha] with Wilson bands at the given normal
// quantile (default: 99% simultaneous over the grid by Bonferroni).
std::vector<SurvivalPoint> overshoot_tail_estimate(const IncrementDistribution& dist, double x,
                                                   std::span<const double> alpha_grid, std::size_t paths,
                                                   std::uint64_t seed, std::optional<double> z = std::nullopt);

struct TauMomentRow {
  double x = 0;
  double moment = 0;  // estimate of E[(Lambda'(0) tau_x)^j]
  double se = 0;
  double residual = 0;  // moment - x^j
};

struct TauMomentTable {
  int j = 1;
  std::vector<TauMomentRow> rows;
  // Fit of log|residual| against log(x + 1); NaN slope when a residual is zero.
  stats::LinearFit growth;
};

TauMomentTable tau_moment_check(const IncrementDistribution& dist, std::span<const double> x_grid, int j,
                                std::size_t paths, std::uint64_t seed);

// Smallest theta with P[overshoot <= 2 theta] >= 1/2, from pilot passages over
// a level far above the mean increment.
double default_coupling_window(const IncrementDistribution& dist, std::uint64_t seed, std::size_t pilot = 10000);

struct CouplingOptions {
  std::optional<double> theta;  // default_coupling_window when empty
  std::size_t min_steps = 0;    // keep both walks running until they have this many increments
};

struct CouplingResult {
  RenewalPath path_a;
  RenewalPath path_b;
  bool coalesced = false;
  std::optional<double> coalesce_height;
  double theta = 0;
  std::size_t attempts = 0;  // maximal-coupling draws before M was crossed
};

// Two walks started at a <= b. The walk at least theta behind moves alone;
// walks within theta move together through a maximal coupling of their next
// positions; merged walks share increments. coalesced means both walks take
// the same value at their first passage over M.
CouplingResult coalescing_coupling(const IncrementDistribution& dist, double a, double b, double M,
                                   std::uint64_t seed, CouplingOptions options = {});

// Maximal coupling of X ~ f(. - lo) and Y ~ f(. - hi) by the rejection
// construction; returns the pair of positions.
std::pair<double, double> maximal_coupling(const IncrementDistribution& dist, double lo, double hi, Engine& engine);

// Integral of min(f(s - lo), f(s - hi)) ds: closed form for exponential laws,
// quadrature otherwise.
double coupling_overlap(const IncrementDistribution& dist, double gap);

struct NonCoalescenceEstimate {
  double M = 0;
  double direct = 0;  // fraction of trials that did not coalesce
  double direct_se = 0;
  double weighted = 0;  // forced-failure likelihood-ratio estimate
  double weighted_se = 0;
};

// Probability that coalescing_coupling fails to coalesce below M, estimated
// both by plain counting and by a likelihood-ratio estimator that forces every
// coupling attempt to fail and multiplies by the failure probabilities.
// weighted_trials = 0 uses trials for both.
NonCoalescenceEstimate estimate_non_coalescence(const IncrementDistribution& dist, double a, double b, double M,
                                                std::size_t trials, std::uint64_t seed, double theta,
                                                std::size_t weighted_trials = 0);

}  // namespace cle
