#include "cle/criteria.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>

#include "cle/error.hpp"
#include "cle/field_analysis.hpp"
#include "cle/reference.hpp"
#include "cle/renewal.hpp"
#include "cle/sobolev.hpp"

namespace cle {
namespace {

using nlohmann::json;
using std::numbers::pi;

constexpr std::array<std::string_view, kCriterionCount> kNames = {
    "renewal_exactness", "tau_moments", "coupling",  "topology_oracle", "conesting_green", "mean_loop_count",
    "field_decay",       "cauchy",      "fields_equal", "sobolev",     "tail_bounds"};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Separations of the co-nesting pairs: eight values spanning a factor 8.
std::vector<double> pair_radii() {
  std::vector<double> r;
  for (int i = 0; i < 8; ++i) r.push_back(std::pow(2.0, -4.0 + 3.0 * i / 7.0));
  return r;
}

// 2^-3 .. 2^-6 in half-octave steps.
std::vector<double> mean_count_eps() {
  std::vector<double> e;
  for (int k = 6; k <= 12; ++k) e.push_back(std::pow(2.0, -k / 2.0));
  return e;
}

double pow2(int k) { return std::ldexp(1.0, k); }

}  // namespace

json CriteriaSettings::to_json() const {
  return {{"seed", seed},
          {"passage_paths", passage_paths},
          {"moment_paths", moment_paths},
          {"coupling_trials", coupling_trials},
          {"weighted_trials", weighted_trials},
          {"ks_samples", ks_samples},
          {"oracle_configs", oracle_configs},
          {"oracle_radius", oracle_radius},
          {"survey_radius", survey_radius},
          {"survey_replicas", survey_replicas},
          {"survey_directions", survey_directions},
          {"field_radius", field_radius},
          {"calibration_replicas", calibration_replicas},
          {"decay_replicas", decay_replicas},
          {"cauchy_replicas", cauchy_replicas},
          {"equal_replicas", equal_replicas},
          {"sobolev_fields", sobolev_fields}};
}

CriteriaSettings CriteriaSettings::from_json(const json& j, std::string_view where) {
  CriteriaSettings s;
  if (!j.is_object()) throw ConfigurationError(std::string(where) + ": expected an object");
  const json defaults = s.to_json();
  for (const auto& [key, value] : j.items()) {
    const std::string path = std::string(where) + "." + key;
    if (!defaults.contains(key)) throw ConfigurationError(path + ": unknown key");
    if (!value.is_number_integer() && !value.is_number_unsigned())
      throw ConfigurationError(path + ": expected an integer");
    if (key != "seed" && value.get<long long>() < 1) throw ConfigurationError(path + ": must be at least 1");
  }
  json merged = defaults;
  merged.update(j);
  s.seed = merged["seed"].get<std::uint64_t>();
  s.passage_paths = merged["passage_paths"];
  s.moment_paths = merged["moment_paths"];
  s.coupling_trials = merged["coupling_trials"];
  s.weighted_trials = merged["weighted_trials"];
  s.ks_samples = merged["ks_samples"];
  s.oracle_configs = merged["oracle_configs"];
  s.oracle_radius = merged["oracle_radius"];
  s.survey_radius = merged["survey_radius"];
  s.survey_replicas = merged["survey_replicas"];
  s.survey_directions = merged["survey_directions"];
  s.field_radius = merged["field_radius"];
  s.calibration_replicas = merged["calibration_replicas"];
  s.decay_replicas = merged["decay_replicas"];
  s.cauchy_replicas = merged["cauchy_replicas"];
  s.equal_replicas = merged["equal_replicas"];
  s.sobolev_fields = merged["sobolev_fields"];
  return s;
}

json CriterionResult::to_json() const {
  return {{"id", id}, {"name", name}, {"passed", passed}, {"summary", summary}, {"numbers", numbers},
          {"seconds", seconds}};
}

CriterionResult CriterionResult::from_json(const json& j) {
  CriterionResult r;
  r.id = j.at("id").get<int>();
  r.name = j.at("name").get<std::string>();
  r.passed = j.at("passed").get<bool>();
  r.summary = j.value("summary", "");
  r.numbers = j.value("numbers", json::object());
  r.seconds = j.value("seconds", 0.0);
  return r;
}

std::string_view criterion_name(int id) {
  if (id < 1 || id > kCriterionCount) throw ArgumentError("no criterion " + std::to_string(id));
  return kNames[static_cast<std::size_t>(id - 1)];
}

int criterion_id(std::string_view text) {
  for (int i = 1; i <= kCriterionCount; ++i)
    if (text == kNames[static_cast<std::size_t>(i - 1)] || text == std::to_string(i)) return i;
  throw ConfigurationError("unknown criterion '" + std::string(text) + "'");
}

std::string format_result_line(const CriterionResult& r) {
  return fmt("%s %2d %-18s %s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.summary.c_str());
}

struct CriteriaRunner::Survey {
  NestingSurveyPlan plan;
  NestingSurvey data;
  double seconds = 0;
};

CriteriaRunner::CriteriaRunner(CriteriaSettings settings) : settings_(settings) {}
CriteriaRunner::~CriteriaRunner() = default;

CriterionResult CriteriaRunner::run(int id) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = renewal_exactness(); break;
      case 2: r = tau_moments(); break;
      case 3: r = coupling(); break;
      case 4: r = topology_oracle(); break;
      case 5: r = conesting_green(); break;
      case 6: r = mean_loop_count(); break;
      case 7: r = field_decay(); break;
      case 8: r = cauchy(); break;
      case 9: r = fields_equal(); break;
      case 10: r = sobolev(); break;
      case 11: r = tail_bounds(); break;
      default: throw ArgumentError("no criterion " + std::to_string(id));
    }
  } catch (const Error& e) {
    r.passed = false;
    r.summary = std::string("error: ") + e.what();
    r.numbers = json::object();
  }
  r.id = id;
  r.name = std::string(criterion_name(id));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.numbers["seconds"] = r.seconds;
  return r;
}

// ---- 1 ----

CriterionResult CriteriaRunner::renewal_exactness() {
  const auto start = std::chrono::steady_clock::now();
  const auto e = IncrementDistribution::exponential(1.0);
  const std::size_t n = settings_.passage_paths;
  Engine engine = make_engine(derive_seed(settings_.seed, "passage", 0));
  std::vector<double> tau(n);
  for (auto& t : tau) t = static_cast<double>(first_passage_summary(e, 10.0, engine).tau);
  const double mean = stats::mean(tau), se = stats::standard_error(tau);
  const bool mean_ok = std::abs(mean - 11.0) <= 3 * se;

  std::vector<double> alpha;
  for (int i = 0; i <= 10; ++i) alpha.push_back(0.5 * i);
  const auto curve = overshoot_tail_estimate(e, 10.0, alpha, n, derive_seed(settings_.seed, "overshoot", 0));
  int outside = 0;
  json bands = json::array();
  for (const auto& p : curve) {
    const bool in = p.band.contains(std::exp(-p.alpha));
    outside += in ? 0 : 1;
    bands.push_back({{"alpha", p.alpha}, {"survival", p.survival}, {"lo", p.band.lo}, {"hi", p.band.hi}});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CriterionResult r;
  r.passed = mean_ok && outside == 0 && secs <= 30.0;
  r.summary = fmt("E[tau_10]=%.4f (|diff|=%.4f, 3SE=%.4f); overshoot outside bands %d/%zu; %.1fs (limit 30s)", mean,
                  std::abs(mean - 11.0), 3 * se, outside, curve.size(), secs);
  r.numbers = {{"paths", n}, {"tau_mean", mean}, {"tau_se", se}, {"bands", bands}, {"runtime", secs}};
  return r;
}

// ---- 2 ----

CriterionResult CriteriaRunner::tau_moments() {
  const std::vector<double> xs{5.0, 10.0, 20.0, 40.0};
  CriterionResult r;
  r.passed = true;
  r.numbers = json::object();
  std::string parts;
  int k = 0;
  for (const auto& dist : {IncrementDistribution::exponential(1.0), IncrementDistribution::gamma(2.0, 1.0)}) {
    const auto t = tau_moment_check(dist, xs, 2, settings_.moment_paths, derive_seed(settings_.seed, "tau", k++));
    const double slope = t.growth.slope;
    const bool ok = std::isfinite(slope) && slope >= 0.7 && slope <= 1.3;
    r.passed = r.passed && ok;
    json rows = json::array();
    for (const auto& row : t.rows)
      rows.push_back({{"x", row.x}, {"moment", row.moment}, {"se", row.se}, {"residual", row.residual}});
    r.numbers[dist.name()] = {{"growth_slope", slope}, {"rows", rows}};
    parts += fmt("%s slope %.3f; ", dist.name().c_str(), slope);
  }
  r.summary = parts + "target [0.7, 1.3]";
  return r;
}

// ---- 3 ----

CriterionResult CriteriaRunner::coupling() {
  const auto start = std::chrono::steady_clock::now();
  const auto e = IncrementDistribution::exponential(1.0);
  const double theta = default_coupling_window(e, derive_seed(settings_.seed, "window", 0));
  const std::vector<double> Ms{5.0, 10.0, 20.0, 40.0};
  std::vector<double> logs;
  bool positive = true;
  json rows = json::array();
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    const auto est = estimate_non_coalescence(e, 0.0, 0.5, Ms[i], settings_.coupling_trials,
                                              derive_seed(settings_.seed, "coalesce", i), theta,
                                              settings_.weighted_trials);
    positive = positive && est.weighted > 0.0;
    logs.push_back(est.weighted > 0.0 ? std::log(est.weighted) : 0.0);
    rows.push_back({{"M", est.M},
                    {"direct", est.direct},
                    {"direct_se", est.direct_se},
                    {"weighted", est.weighted},
                    {"weighted_se", est.weighted_se}});
  }
  const auto fit = stats::fit_line(Ms, logs);

  // Marginals: the first ten increments of each coupled walk against direct draws.
  const std::size_t per = 10;
  const std::size_t trials = (settings_.ks_samples + per - 1) / per;
  std::vector<double> ca, cb, direct(trials * per);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto c = coalescing_coupling(e, 0.0, 0.5, 10.0, derive_seed(settings_.seed, "ks", t), {theta, per});
    for (std::size_t i = 0; i < per; ++i) {
      ca.push_back(c.path_a.increments[i]);
      cb.push_back(c.path_b.increments[i]);
    }
  }
  // Exact CDF as reference; two-sample statistics against direct draws are kept for the record.
  const auto exp_cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
  const auto ka = stats::ks_one_sample(ca, exp_cdf);
  const auto kb = stats::ks_one_sample(cb, exp_cdf);
  Engine engine = make_engine(derive_seed(settings_.seed, "ks-direct", 0));
  for (auto& x : direct) x = e.sample(engine);
  const auto da = stats::ks_two_sample(ca, direct);
  const auto db = stats::ks_two_sample(cb, direct);
  const bool ks_ok = ka.statistic < ka.critical_1pct && kb.statistic < kb.critical_1pct;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CriterionResult r;
  r.passed = positive && fit.slope < 0 && fit.r2 >= 0.9 && ks_ok && secs <= 120.0;
  r.summary = fmt("log P[no coalescence] vs M slope %.4f R2 %.4f (>= 0.9); KS vs Exp(1) cdf D %.4f/%.4f vs %.4f; %.1fs (limit 120s)",
                  fit.slope, fit.r2, ka.statistic, kb.statistic, ka.critical_1pct, secs);
  r.numbers = {{"theta", theta},     {"rows", rows},           {"slope", fit.slope},
               {"r2", fit.r2},       {"ks_a", ka.statistic},   {"ks_b", kb.statistic},
               {"ks_critical", ka.critical_1pct}, {"ks_n", ca.size()}, {"runtime", secs},
               {"ks2_a", da.statistic}, {"ks2_b", db.statistic}, {"ks2_critical", da.critical_1pct}};
  return r;
}

// ---- 4 ----

CriterionResult CriteriaRunner::topology_oracle() {
  namespace ref = reference;
  std::array<long, 5> mismatch{};  // depth, ball, co-nesting, J cap, J subset
  long cells = 0, queries = 0;
  Engine rng = make_engine(derive_seed(settings_.seed, "oracle-queries", 0));
  std::uniform_real_distribution<double> u(-1.0, 1.0), u01(0.0, 1.0);
  auto point = [&](double rmax) {
    for (;;) {
      const Point p{u(rng) * rmax, u(rng) * rmax};
      if (std::hypot(p.x, p.y) < rmax) return p;
    }
  };
  const auto spec = LatticeSpec::percolation(settings_.oracle_radius);
  for (std::size_t i = 0; i < settings_.oracle_configs; ++i) {
    const auto loops = extract_loops(sample_percolation(spec, derive_seed(settings_.seed, "oracle", i)));
    const auto polys = ref::polygons(loops);
    const auto grid = nesting_depth(loops);
    for (CellIndex c = 0; c < loops.lattice->size(); ++c) {
      if (!loops.lattice->in_domain(c)) continue;
      ++cells;
      mismatch[0] += grid.at(c) != ref::depth(polys, ref::centre(loops, c));
    }
    for (int t = 0; t < 5; ++t) {
      ++queries;
      const Point z = point(0.7);
      const double eps = u01(rng) * (0.95 - std::hypot(z.x, z.y));
      const Point w = point(0.95);
      mismatch[1] += count_surrounding_ball(loops, z, eps) != ref::surrounding_ball(loops, polys, z, eps);
      mismatch[2] += co_nesting_count(loops, z, w) != ref::co_nesting(loops, polys, z, w);
      const auto j = j_cap_j_subset(loops, z, eps);
      const auto jo = ref::j_indices(loops, polys, z, eps);
      mismatch[3] += j.cap != jo.cap;
      mismatch[4] += j.subset != jo.subset;
    }
  }
  const long total = mismatch[0] + mismatch[1] + mismatch[2] + mismatch[3] + mismatch[4];
  CriterionResult r;
  r.passed = total == 0;
  r.summary = fmt("%zu configs, %ld cells, %ld queries: mismatches depth %ld ball %ld co-nesting %ld J_cap %ld J_subset %ld",
                  settings_.oracle_configs, cells, queries, mismatch[0], mismatch[1], mismatch[2], mismatch[3],
                  mismatch[4]);
  r.numbers = {{"configs", settings_.oracle_configs},
               {"cells", cells},
               {"queries", queries},
               {"mismatch_depth", mismatch[0]},
               {"mismatch_ball", mismatch[1]},
               {"mismatch_conesting", mismatch[2]},
               {"mismatch_j_cap", mismatch[3]},
               {"mismatch_j_subset", mismatch[4]}};
  return r;
}

// ---- 5, 6, 11: one survey ----

const CriteriaRunner::Survey& CriteriaRunner::survey() {
  if (survey_) return *survey_;
  auto s = std::make_unique<Survey>();
  const int dirs = settings_.survey_directions;
  for (double r : pair_radii()) {
    std::vector<PointPair> g;
    for (int d = 0; d < dirs; ++d) {
      const double a = 2 * pi * d / dirs + 0.3;
      g.push_back({{0, 0}, {r * std::cos(a), r * std::sin(a)}});
    }
    s->plan.pair_groups.push_back(std::move(g));
  }
  s->plan.ball_eps = mean_count_eps();
  for (int k = 0; k < 8; ++k) s->plan.j_radii.push_back(0.02 * std::pow(2.0, k / 2.0));
  s->plan.j_centers.push_back({0, 0});
  for (int d = 0; d < 4; ++d) {
    const double a = pi / 4 + pi / 2 * d;
    s->plan.j_centers.push_back({0.25 * std::cos(a), 0.25 * std::sin(a)});
    s->plan.j_centers.push_back({0.5 * std::cos(a + pi / 4), 0.5 * std::sin(a + pi / 4)});
  }
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(settings_.survey_radius);
  ens.replicas = settings_.survey_replicas;
  ens.seed = settings_.seed;
  ens.stage = "survey";
  const auto start = std::chrono::steady_clock::now();
  s->data = nesting_survey(ens, s->plan);
  s->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  survey_ = std::move(s);
  return *survey_;
}

CriterionResult CriteriaRunner::conesting_green() {
  const auto& s = survey();
  const double nu = IncrementDistribution::ssw_cle(6.0).typical_nesting_constant();
  const auto radii = pair_radii();
  std::vector<double> g, m1, ratio;
  json rows = json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto a = conesting_moment(s.data, s.plan, i, 1, nu);
    const auto b = conesting_moment(s.data, s.plan, i, 2, nu);
    g.push_back(a.green);
    m1.push_back(a.estimate);
    ratio.push_back(std::abs(b.residual) / (b.green + 1));
    rows.push_back({{"separation", radii[i]},
                    {"green", a.green},
                    {"moment1", a.estimate},
                    {"moment1_se", a.se},
                    {"prediction1", a.prediction},
                    {"moment2", b.estimate},
                    {"moment2_se", b.se},
                    {"prediction2", b.prediction},
                    {"residual2_over_g1", ratio.back()}});
  }
  const auto fit = stats::fit_line(g, m1);
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  const double spread = *lo > 0 ? *hi / *lo : INFINITY;
  CriterionResult r;
  r.passed = fit.r2 >= 0.98 && spread <= 5.0 && s.seconds <= 1800.0;
  r.summary = fmt("E[N_zw] on G: slope %.4f (2 pi nu = %.4f) R2 %.4f (>= 0.98); j=2 |residual|/(G+1) spread %.3f (<= 5); "
                  "survey %.0fs (limit 1800s)",
                  fit.slope, 2 * pi * nu, fit.r2, spread, s.seconds);
  r.numbers = {{"replicas", s.data.replicas}, {"radius", settings_.survey_radius}, {"rows", rows},
               {"slope", fit.slope},          {"intercept", fit.intercept},      {"r2", fit.r2},
               {"nu", nu},                    {"spread", spread},                {"survey_seconds", s.seconds}};
  return r;
}

CriterionResult CriteriaRunner::mean_loop_count() {
  const auto& s = survey();
  std::vector<double> x, y;
  json rows = json::array();
  for (std::size_t e = 0; e < s.plan.ball_eps.size(); ++e) {
    const auto& counts = s.data.ball_counts[e];
    x.push_back(std::log(1 / s.plan.ball_eps[e]));
    y.push_back(stats::mean(counts));
    rows.push_back({{"eps", s.plan.ball_eps[e]}, {"mean", y.back()}, {"se", stats::standard_error(counts)}});
  }
  const auto fit = stats::fit_line(x, y);
  const double nu = IncrementDistribution::ssw_cle(6.0).typical_nesting_constant();
  CriterionResult r;
  r.passed = fit.r2 >= 0.98;
  r.summary = fmt("mean N_0(eps) vs log(1/eps) over eps 2^-3..2^-6: slope %.4f (nu = %.4f) R2 %.4f (>= 0.98)",
                  fit.slope, nu, fit.r2);
  r.numbers = {{"rows", rows}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"nu", nu}};
  return r;
}

CriterionResult CriteriaRunner::tail_bounds() {
  const auto& s = survey();
  CriterionResult r;
  r.passed = true;
  std::string parts;
  for (const auto& [name, samples] : {std::pair{"N_zw", &s.data.pair_counts}, std::pair{"J_gap", &s.data.j_gaps}}) {
    const auto t = log_survival_fit(*samples);
    const bool ok = t.fit.slope < 0 && t.fit.r2 >= 0.9;
    r.passed = r.passed && ok;
    r.numbers[name] = {{"samples", samples->size()}, {"k", t.k},           {"log_survival", t.log_survival},
                       {"slope", t.fit.slope},       {"r2", t.fit.r2}};
    parts += fmt("%s slope %.3f R2 %.3f over %zu levels (n=%zu); ", name, t.fit.slope, t.fit.r2, t.k.size(),
                 samples->size());
  }
  r.summary = parts + "target slope < 0, R2 >= 0.9";
  return r;
}

// ---- 7, 8, 9 ----

CriterionResult CriteriaRunner::field_decay() {
  EnsembleSpec cal;
  cal.lattice = LatticeSpec::percolation(settings_.field_radius);
  cal.replicas = settings_.calibration_replicas;
  cal.seed = settings_.seed;
  cal.stage = "calibration";
  EnsembleSpec ens = cal;
  ens.replicas = settings_.decay_replicas;
  ens.stage = "decay";
  const FieldGrid grid{32, 0.5};
  std::vector<double> eps;
  std::vector<EpsPair> pairs;
  for (int k = 3; k <= 7; ++k) eps.push_back(pow2(-k));
  for (int k = 3; k <= 6; ++k) pairs.push_back({pow2(-k), pow2(-k - 1)});

  CriterionResult r;
  r.passed = true;
  std::string parts;
  for (const auto& mu : {MuSpec::unit(), MuSpec::signed_bernoulli()}) {
    std::vector<MeanTable> tables;
    if (mu.zero_mean()) {
      for (double e : eps) tables.push_back(exact_zero_table(ens.lattice, mu, e, grid));
    } else {
      tables = calibrate_means(cal, mu, eps, grid);
    }
    const auto d = field_diff_decay_test(ens, tables, mu, pairs, grid);
    const bool ok = d.slope_ci.lo > 0;
    r.passed = r.passed && ok;
    json pts = json::array();
    for (const auto& p : d.points) pts.push_back({{"eps", p.eps}, {"integral", p.integral}, {"log_se", p.log_se}});
    r.numbers[mu.name()] = {{"points", pts},        {"slope", d.fit.slope},     {"slope_se", d.fit.slope_se},
                            {"ci_lo", d.slope_ci.lo}, {"ci_hi", d.slope_ci.hi}, {"chi2", d.fit.chi2}};
    parts += fmt("%s c = %.3f, 95%% CI [%.3f, %.3f]; ", mu.name().c_str(), d.fit.slope, d.slope_ci.lo, d.slope_ci.hi);
  }
  r.summary = parts + "target CI > 0";
  return r;
}

CriterionResult CriteriaRunner::cauchy() {
  EnsembleSpec cal;
  cal.lattice = LatticeSpec::percolation(settings_.field_radius);
  cal.replicas = settings_.calibration_replicas;
  cal.seed = settings_.seed;
  cal.stage = "calibration";
  EnsembleSpec ens = cal;
  ens.replicas = settings_.cauchy_replicas;
  ens.stage = "cauchy";
  const FieldGrid grid{32, 0.5, 0.45};
  const MuSpec mu = MuSpec::unit();
  std::vector<double> eps;
  for (int n = 1; n <= 5; ++n) eps.push_back(pow2(-n));
  const auto tables = calibrate_means(cal, mu, eps, grid);
  const auto c = cauchy_diagnostic(ens, tables, mu, 0.5, 4, grid, 0.1);
  const double first = c.median.front(), last = c.median.back();
  CriterionResult r;
  r.passed = last <= first / 4;
  r.summary = fmt("median H^-2.1 norms n=1..4: %.4g %.4g %.4g %.4g; n=4 / n=1 = %.3g (<= 0.25)", c.median[0],
                  c.median[1], c.median[2], c.median[3], first > 0 ? last / first : INFINITY);
  r.numbers = {{"median", c.median}, {"replicas", ens.replicas}, {"mu", mu.name()}};
  return r;
}

CriterionResult CriteriaRunner::fields_equal() {
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(settings_.field_radius);
  ens.replicas = settings_.equal_replicas;
  ens.seed = settings_.seed;
  ens.stage = "fields-equal";
  const FieldGrid grid{32, 0.5};
  std::vector<double> g(grid.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = bump(grid.point(k).x, grid.point(k).y, 0.45);
  std::vector<double> eps;
  std::vector<int> n;
  for (int k = 2; k <= 8; ++k) {
    eps.push_back(pow2(-k));
    n.push_back((k + 1) / 2);
  }
  eps.push_back(0.0);
  n.push_back(1000);
  const auto gaps = fields_equal_test(ens, MuSpec::signed_bernoulli(), g, eps, n, grid);
  bool monotone = true;
  json rows = json::array();
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (i > 0 && i + 1 < gaps.size()) monotone = monotone && gaps[i].gap <= gaps[i - 1].gap;
    rows.push_back({{"eps", gaps[i].eps}, {"n", gaps[i].n}, {"gap", gaps[i].gap}, {"se", gaps[i].se}});
  }
  const double initial = gaps.front().gap, final = gaps[gaps.size() - 2].gap, saturated = gaps.back().gap;
  CriterionResult r;
  r.passed = monotone && final <= 0.25 * initial && saturated == 0.0;
  r.summary = fmt("gap %.4g -> %.4g (ratio %.3f, <= 0.25), %s; saturation gap %.3g (== 0)", initial, final,
                  final / initial, monotone ? "decreasing" : "not decreasing", saturated);
  r.numbers = {{"ladder", rows}, {"ratio", final / initial}, {"monotone", monotone}, {"saturation_gap", saturated}};
  return r;
}

// ---- 10 ----

CriterionResult CriteriaRunner::sobolev() {
  const int n = 32;
  const auto m = static_cast<std::size_t>(n * n);
  Engine rng = make_engine(derive_seed(settings_.seed, "sobolev", 0));
  std::normal_distribution<double> normal;
  double parseval = 0, mode_err = 0;
  long violations = 0;
  const std::vector<double> ss{-3.0, -2.1, -1.0, 0.0, 0.5, 2.0};
  for (std::size_t t = 0; t < settings_.sobolev_fields; ++t) {
    std::vector<double> v(m);
    for (auto& x : v) x = normal(rng);
    const auto f = SpectralField::from_real(v, n);
    parseval = std::max(parseval, std::abs(sobolev_norm(f, 0.0) - f.l2_norm()));
    double prev = 0;
    for (double s : ss) {
      const double norm = sobolev_norm(f, s);
      violations += norm < prev;
      prev = norm;
    }
  }
  for (auto [kx, ky] : {std::pair{1, 0}, std::pair{3, -2}, std::pair{0, 7}, std::pair{-16, 5}, std::pair{-9, -11}}) {
    std::vector<std::complex<double>> mode(m);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        mode[static_cast<std::size_t>(j * n + i)] = std::polar(1.0, 2 * pi * (kx * i + ky * j) / n);
    const auto f = SpectralField::from_complex(mode, n);
    for (double s : ss)
      mode_err = std::max(mode_err, std::abs(sobolev_norm(f, s) - std::pow(1.0 + kx * kx + ky * ky, s / 2)));
  }
  CriterionResult r;
  r.passed = parseval <= 1e-10 && mode_err <= 1e-10 && violations == 0;
  r.summary = fmt("Parseval max err %.2g; single-mode max err %.2g (<= 1e-10); monotonicity violations %ld over %zu fields",
                  parseval, mode_err, violations, settings_.sobolev_fields);
  r.numbers = {{"parseval_error", parseval}, {"mode_error", mode_err}, {"monotonicity_violations", violations}};
  return r;
}

}  // namespace cle
