#include "cle/field_analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cle/error.hpp"
#include "cle/greens.hpp"
#include "cle/sobolev.hpp"

namespace cle {

NestingSurvey nesting_survey(const EnsembleSpec& ensemble, const NestingSurveyPlan& plan) {
  if (plan.max_moment < 1) throw ArgumentError("max_moment must be at least 1");
  NestingSurvey out;
  out.replicas = ensemble.replicas;
  out.moments.assign(plan.pair_groups.size(),
                     std::vector<std::vector<double>>(static_cast<std::size_t>(plan.max_moment)));
  out.ball_counts.assign(plan.ball_eps.size(), {});

  const CellLattice lattice(ensemble.lattice);
  const double radius = lattice.radius();
  std::vector<BallProbe> probes;
  for (double eps : plan.ball_eps) {
    if (std::hypot(plan.center.x, plan.center.y) + eps > 1.0 + 1e-12)
      throw DomainError("survey ball is not contained in the domain");
    probes.emplace_back(lattice, eps * radius);
  }

  const std::vector<Point> j_centers = plan.j_centers.empty() ? std::vector<Point>{plan.center} : plan.j_centers;
  for (const Point c : j_centers)
    for (double r : plan.j_radii)
      if (std::hypot(c.x, c.y) + r > 1.0 + 1e-12) throw DomainError("survey ball is not contained in the domain");

  for_each_member(ensemble, [&](std::size_t, const LoopConfiguration& loops) {
    for (std::size_t g = 0; g < plan.pair_groups.size(); ++g) {
      const auto& group = plan.pair_groups[g];
      std::vector<double> acc(static_cast<std::size_t>(plan.max_moment), 0.0);
      for (const auto& [z, w] : group) {
        const int c = co_nesting_count(loops, z, w);
        out.pair_counts.push_back(c);
        double p = 1.0;
        for (auto& a : acc) a += (p *= c);
      }
      for (std::size_t j = 0; j < acc.size(); ++j)
        out.moments[g][j].push_back(acc[j] / static_cast<double>(group.size()));
    }
    for (std::size_t e = 0; e < probes.size(); ++e) {
      const LoopIndex l = probes[e].enclosing_loop(loops, plan.center.x * radius, plan.center.y * radius);
      out.ball_counts[e].push_back(loops.depth_of_loop(l));
    }
    if (plan.j_radii.empty()) return;
    for (const Point c : j_centers) {
      const ChainExtent ext = chain_extent(loops, c);
      for (double r : plan.j_radii) {
        const auto j = j_indices_from_extent(ext, r * radius);
        if (j.cap && j.subset) out.j_gaps.push_back(*j.subset - *j.cap);
      }
    }
  });
  return out;
}

ConestingMoment conesting_moment(const NestingSurvey& survey, const NestingSurveyPlan& plan, std::size_t group,
                                 int j, double nu) {
  if (survey.replicas < 100) throw InsufficientDataError("co-nesting moments need at least 100 replicas");
  if (group >= plan.pair_groups.size() || j < 1 || j > plan.max_moment)
    throw ArgumentError("no such co-nesting group or moment in the survey");
  ConestingMoment m;
  std::vector<double> greens;
  for (const auto& [z, w] : plan.pair_groups[group]) greens.push_back(greens_disk(z, w));
  m.green = stats::mean(greens);
  const auto& v = survey.moments[group][static_cast<std::size_t>(j - 1)];
  m.estimate = stats::mean(v);
  m.se = stats::standard_error(v);
  m.prediction = std::pow(nu * 2.0 * std::numbers::pi * m.green, j);
  m.residual = m.estimate - m.prediction;
  return m;
}

ConestingMoment conesting_moment_test(const EnsembleSpec& ensemble, Point z, Point w, int j, double nu) {
  if (ensemble.replicas < 100) throw InsufficientDataError("co-nesting moments need at least 100 replicas");
  NestingSurveyPlan plan;
  plan.pair_groups = {{{z, w}}};
  plan.max_moment = std::max(j, 1);
  return conesting_moment(nesting_survey(ensemble, plan), plan, 0, j, nu);
}

TailFit log_survival_fit(std::span<const int> samples, std::size_t min_survivors) {
  TailFit out;
  if (samples.empty()) throw InsufficientDataError("no samples for a tail fit");
  const int lo = *std::min_element(samples.begin(), samples.end());
  const int hi = *std::max_element(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (int k = lo; k <= hi; ++k) {
    const auto survivors = static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [k](int s) { return s >= k; }));
    if (survivors < min_survivors) break;
    out.k.push_back(k);
    out.log_survival.push_back(std::log(static_cast<double>(survivors) / n));
  }
  if (out.k.size() < 3) throw InsufficientDataError("tail fit needs at least three levels with enough survivors");
  out.fit = stats::fit_line(out.k, out.log_survival);
  return out;
}

const MeanTable& table_for(std::span<const MeanTable> tables, double eps) {
  for (const auto& t : tables)
    if (t.eps == eps) return t;
  throw CalibrationError("no mean table for eps = " + std::to_string(eps));
}

namespace {

Eigen::MatrixXd rows_of(std::span<const std::vector<double>> diffs, std::size_t first, std::size_t last) {
  const auto m = static_cast<Eigen::Index>(diffs.front().size());
  Eigen::MatrixXd d(static_cast<Eigen::Index>(last - first), m);
  for (std::size_t r = first; r < last; ++r)
    d.row(static_cast<Eigen::Index>(r - first)) = Eigen::Map<const Eigen::RowVectorXd>(diffs[r].data(), m);
  return d;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& d) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d.cols(), d.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

double abs_integral(const Eigen::MatrixXd& gram_sum, double replicas, const FieldGrid& grid) {
  return gram_sum.cwiseAbs().sum() / replicas * grid.cell_area() * grid.cell_area();
}

}  // namespace

double covariance_abs_integral(std::span<const std::vector<double>> diffs, const FieldGrid& grid) {
  if (diffs.empty()) throw InsufficientDataError("no difference fields");
  for (const auto& d : diffs)
    if (d.size() != grid.size()) throw ArgumentError("difference field size does not match the grid");
  return abs_integral(gram(rows_of(diffs, 0, diffs.size())), static_cast<double>(diffs.size()), grid);
}

DecayResult field_diff_decay_test(const EnsembleSpec& ensemble, std::span<const MeanTable> tables, const MuSpec& mu,
                                  std::span<const EpsPair> pairs, const FieldGrid& grid, int groups) {
  if (groups < 2 || ensemble.replicas < static_cast<std::size_t>(groups))
    throw InsufficientDataError("jackknife needs at least two groups of replicas");
  std::vector<double> eps_list;
  for (const auto& p : pairs) {
    eps_list.push_back(p.eps1);
    eps_list.push_back(p.eps2);
  }
  std::sort(eps_list.begin(), eps_list.end());
  eps_list.erase(std::unique(eps_list.begin(), eps_list.end()), eps_list.end());
  std::map<double, const MeanTable*> table;
  for (double e : eps_list) {
    const MeanTable& t = table_for(tables, e);
    if (!(t.mu == mu) || !(t.grid == grid) || !(t.lattice == ensemble.lattice))
      throw CalibrationError("mean table does not match the ensemble, weight law or grid");
    table[e] = &t;
  }

  const std::size_t m = grid.size();
  std::vector<std::vector<std::vector<double>>> diffs(pairs.size());
  for_each_member(ensemble, [&](std::size_t r, const LoopConfiguration& loops) {
    std::map<double, std::vector<double>> h;
    for (double e : eps_list) {
      auto sample = weighted_field(loops, mu, ensemble.weight_seed(r), e, table[e], grid);
      h[e] = std::move(sample.h);
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      std::vector<double> d(m);
      const auto& a = h[pairs[p].eps1];
      const auto& b = h[pairs[p].eps2];
      for (std::size_t k = 0; k < m; ++k) d[k] = a[k] - b[k];
      diffs[p].push_back(std::move(d));
    }
  });

  DecayResult out;
  const std::size_t n = ensemble.replicas;
  const auto g = static_cast<std::size_t>(groups);
  std::vector<double> x, y, sigma;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    DecayPoint pt;
    pt.eps = std::max(pairs[p].eps1, pairs[p].eps2);
    const Eigen::MatrixXd full = gram(rows_of(diffs[p], 0, n));
    pt.integral = abs_integral(full, static_cast<double>(n), grid);
    if (pt.integral > 0.0) {
      std::vector<double> leave_out;
      for (std::size_t k = 0; k < g; ++k) {
        const std::size_t first = k * n / g;
        const std::size_t last = (k + 1) * n / g;
        const Eigen::MatrixXd part = gram(rows_of(diffs[p], first, last));
        leave_out.push_back(std::log(abs_integral(full - part, static_cast<double>(n - (last - first)), grid)));
      }
      const double centre = stats::mean(leave_out);
      double ss = 0.0;
      for (double v : leave_out) ss += (v - centre) * (v - centre);
      pt.log_se = std::sqrt(ss * static_cast<double>(g - 1) / static_cast<double>(g));
      x.push_back(std::log(pt.eps));
      y.push_back(std::log(pt.integral));
      sigma.push_back(pt.log_se);
    }
    out.points.push_back(pt);
  }
  // Pairs with eps1 = eps2 have a zero integral and carry no decay information.
  if (x.size() >= 3) {
    out.fit = stats::fit_line_weighted(x, y, sigma);
    const double z = stats::normal_quantile(0.975);
    out.slope_ci = {out.fit.slope - z * out.fit.slope_se, out.fit.slope + z * out.fit.slope_se};
  }
  return out;
}

double cauchy_norm(std::span<const double> h1, std::span<const double> h2, const FieldGrid& grid, double delta) {
  if (h1.size() != grid.size() || h2.size() != grid.size()) throw ArgumentError("field size does not match the grid");
  if (!(grid.support_radius <= grid.half_width)) throw ArgumentError("window must be supported inside the grid");
  std::vector<double> f(grid.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Point z = grid.point(k);
    f[k] = bump(z.x, z.y, grid.support_radius) * (h1[k] - h2[k]);
  }
  return sobolev_norm(SpectralField::from_real(f, grid.n), -2.0 - delta);
}

CauchyResult cauchy_diagnostic(const EnsembleSpec& ensemble, std::span<const MeanTable> tables, const MuSpec& mu,
                               double a, int n_max, const FieldGrid& grid, double delta) {
  if (!(a > 0.0 && a < 1.0)) throw ArgumentError("scale ratio must lie in (0, 1)");
  if (n_max < 1) throw ArgumentError("n_max must be at least 1");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  std::vector<double> eps;
  for (int n = 1; n <= n_max + 1; ++n) eps.push_back(std::pow(a, n));
  for (double e : eps) {
    const MeanTable& t = table_for(tables, e);
    if (!(t.mu == mu) || !(t.grid == grid) || !(t.lattice == ensemble.lattice))
      throw CalibrationError("mean table does not match the ensemble, weight law or grid");
  }
  CauchyResult out;
  for_each_member(ensemble, [&](std::size_t r, const LoopConfiguration& loops) {
    std::vector<std::vector<double>> h;
    for (double e : eps) h.push_back(weighted_field(loops, mu, ensemble.weight_seed(r), e, &table_for(tables, e), grid).h);
    std::vector<double> row;
    for (int n = 0; n < n_max; ++n)
      row.push_back(cauchy_norm(h[static_cast<std::size_t>(n)], h[static_cast<std::size_t>(n + 1)], grid, delta));
    out.norms.push_back(std::move(row));
  });
  for (int n = 0; n < n_max; ++n) {
    std::vector<double> col;
    for (const auto& row : out.norms) col.push_back(row[static_cast<std::size_t>(n)]);
    out.median.push_back(stats::median(std::move(col)));
  }
  return out;
}

double pairing_gap(const WeightedFieldSample& h, std::span<const double> step, std::uint64_t step_xi_seed,
                   std::span<const double> g) {
  if (h.xi_seed != step_xi_seed) throw ArgumentError("weighted and step fields use different weight streams");
  const double d = pair_with(h.h, g, h.grid) - pair_with(step, g, h.grid);
  return d * d;
}

std::vector<GapPoint> fields_equal_test(const EnsembleSpec& ensemble, const MuSpec& mu, std::span<const double> g,
                                        std::span<const double> eps_seq, std::span<const int> n_seq,
                                        const FieldGrid& grid) {
  if (!mu.zero_mean()) throw ArgumentError("fields_equal_test needs a zero-mean weight law");
  if (eps_seq.size() != n_seq.size()) throw ArgumentError("eps and n ladders differ in length");
  if (g.size() != grid.size()) throw ArgumentError("test function size does not match the grid");
  std::vector<MeanTable> zero;
  for (double e : eps_seq) zero.push_back(exact_zero_table(ensemble.lattice, mu, e, grid));
  std::vector<std::vector<double>> gaps(eps_seq.size());
  for_each_member(ensemble, [&](std::size_t r, const LoopConfiguration& loops) {
    const std::uint64_t xi = ensemble.weight_seed(r);
    for (std::size_t i = 0; i < eps_seq.size(); ++i) {
      const auto h = weighted_field(loops, mu, xi, eps_seq[i], &zero[i], grid);
      const auto step = step_nesting_field(loops, mu, xi, n_seq[i], grid);
      gaps[i].push_back(pairing_gap(h, step, xi, g));
    }
  });
  std::vector<GapPoint> out;
  for (std::size_t i = 0; i < eps_seq.size(); ++i)
    out.push_back({eps_seq[i], n_seq[i], stats::mean(gaps[i]), stats::standard_error(gaps[i])});
  return out;
}

}  // namespace cle
