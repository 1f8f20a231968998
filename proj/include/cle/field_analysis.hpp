#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cle/fields.hpp"
#include "cle/stats.hpp"

namespace cle {

// ---- one streaming pass over an ensemble collecting nesting statistics ----

using PointPair = std::pair<Point, Point>;

struct NestingSurveyPlan {
  // Pairs inside a group are averaged per replica (e.g. the same separation
  // in several directions).
  std::vector<std::vector<PointPair>> pair_groups;
  int max_moment = 2;
  Point center{0, 0};
  std::vector<double> ball_eps;  // N_center(eps)
  std::vector<Point> j_centers;  // J indices around these points (center when empty)
  std::vector<double> j_radii;
};

struct NestingSurvey {
  std::size_t replicas = 0;
  // moments[g][j - 1][r]: replica r's average of N_{z,w}^j over group g.
  std::vector<std::vector<std::vector<double>>> moments;
  std::vector<int> pair_counts;                  // every N_{z,w}, pooled
  std::vector<std::vector<double>> ball_counts;  // [eps][replica]
  std::vector<int> j_gaps;                       // J_subset - J_cap where both exist, pooled over centers and radii
};

NestingSurvey nesting_survey(const EnsembleSpec& ensemble, const NestingSurveyPlan& plan);

struct ConestingMoment {
  double green = 0;       // mean of G over the group's pairs
  double estimate = 0;    // E[N_{z,w}^j]
  double se = 0;
  double prediction = 0;  // (nu 2 pi G)^j
  double residual = 0;    // estimate - prediction
};

// Throws InsufficientDataError below 100 replicas.
ConestingMoment conesting_moment(const NestingSurvey& survey, const NestingSurveyPlan& plan, std::size_t group,
                                 int j, double nu);
ConestingMoment conesting_moment_test(const EnsembleSpec& ensemble, Point z, Point w, int j, double nu);

// Least-squares line of log P[X >= k] against k over the k with at least
// min_survivors samples >= k.
struct TailFit {
  std::vector<double> k;
  std::vector<double> log_survival;
  stats::LinearFit fit;
};
TailFit log_survival_fit(std::span<const int> samples, std::size_t min_survivors = 50);

// ---- field-difference decay ----

struct EpsPair {
  double eps1 = 0;
  double eps2 = 0;
};

struct DecayPoint {
  double eps = 0;  // max(eps1, eps2)
  double integral = 0;
  double log_se = 0;  // jackknife SE of log(integral)
};

struct DecayResult {
  std::vector<DecayPoint> points;
  stats::LinearFit fit;  // log integral against log eps, weighted
  stats::Interval slope_ci;
};

// Double integral over the grid of |E[(h1(z) - h2(z))(h1(w) - h2(w))]| for
// every eps pair, with fields centred by the tables, and the fitted decay
// exponent. The integral of a pair with eps1 = eps2 is 0. Jackknife over
// `groups` replica groups.
DecayResult field_diff_decay_test(const EnsembleSpec& ensemble, std::span<const MeanTable> tables, const MuSpec& mu,
                                  std::span<const EpsPair> pairs, const FieldGrid& grid, int groups = 10);

// The covariance matrix of the difference fields from per-replica
// difference fields (rows), and its absolute double integral.
double covariance_abs_integral(std::span<const std::vector<double>> diffs, const FieldGrid& grid);

// ---- Cauchy diagnostic ----

struct CauchyResult {
  std::vector<double> median;             // n = 1..n_max
  std::vector<std::vector<double>> norms;  // [replica][n - 1]
};

// ||psi (h_{a^n} - h_{a^{n+1}})||_{H^{-2-delta}} per replica on the grid torus,
// psi = bump of the grid's support radius.
CauchyResult cauchy_diagnostic(const EnsembleSpec& ensemble, std::span<const MeanTable> tables, const MuSpec& mu,
                               double a, int n_max, const FieldGrid& grid, double delta = 0.1);

// The norm of one difference field.
double cauchy_norm(std::span<const double> h1, std::span<const double> h2, const FieldGrid& grid, double delta);

// ---- step and weighted field agreement ----

struct GapPoint {
  double eps = 0;
  int n = 0;
  double gap = 0;  // E[(<h_eps, g> - <hstep_n, g>)^2]
  double se = 0;
};

// (<h, g> - <step, g>)^2 for one replica. ArgumentError when the two fields
// were built from different weight streams.
double pairing_gap(const WeightedFieldSample& h, std::span<const double> step, std::uint64_t step_xi_seed,
                   std::span<const double> g);

// The gap along the (eps_seq[i], n_seq[i]) ladder with exact zero centring.
std::vector<GapPoint> fields_equal_test(const EnsembleSpec& ensemble, const MuSpec& mu, std::span<const double> g,
                                        std::span<const double> eps_seq, std::span<const int> n_seq,
                                        const FieldGrid& grid);

// Lookup by eps; CalibrationError when absent.
const MeanTable& table_for(std::span<const MeanTable> tables, double eps);

}  // namespace cle
