#include "cle/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "cle/error.hpp"

namespace cle {

using std::numbers::pi;

struct IncrementDistribution::Impl {
  IncrementFamily family = IncrementFamily::Exponential;
  double rate = 1.0;
  double shape = 1.0;
  double kappa = 0.0;
  std::vector<double> samples;  // empirical
  // Tabulated SSW density on x_j = j * dx.
  double dx = 0.0;
  std::vector<double> pdf;
  std::vector<double> cdf;
};

namespace {

template <typename T>
T ssw_mgf_generic(double kappa, T lambda) {
  const double a = 1.0 - 4.0 / kappa;
  const T s = std::sqrt(T(a * a) + 8.0 * lambda / kappa);
  return T(-std::cos(4.0 * pi / kappa)) / std::cos(pi * s);
}

void tabulate_ssw(IncrementDistribution::Impl& impl) {
  // Fourier inversion of the characteristic function phi(t) = M(i t):
  // f(x_j) = (h / 2 pi) sum_k phi(t_k) exp(-i t_k x_j), t_k = k h.
  constexpr int n = 1 << 16;
  const double dx = 0.01;
  const double h = 2.0 * pi / (n * dx);
  fftw_complex* buf = fftw_alloc_complex(n);
  for (int k = 0; k < n; ++k) {
    const double t = (k < n / 2 ? k : k - n) * h;
    const std::complex<double> phi = ssw_mgf_generic(impl.kappa, std::complex<double>(0.0, t));
    buf[k][0] = phi.real();
    buf[k][1] = phi.imag();
  }
  fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  impl.dx = dx;
  impl.pdf.assign(n, 0.0);
  for (int j = 1; j < n / 2; ++j) impl.pdf[static_cast<std::size_t>(j)] = std::max(0.0, buf[j][0] * h / (2.0 * pi));
  fftw_free(buf);
  // Drop the part of the period that aliases negative x.
  impl.pdf.resize(n / 2);
  impl.cdf.assign(impl.pdf.size(), 0.0);
  for (std::size_t j = 1; j < impl.pdf.size(); ++j)
    impl.cdf[j] = impl.cdf[j - 1] + 0.5 * dx * (impl.pdf[j - 1] + impl.pdf[j]);
  const double total = impl.cdf.back();
  for (auto& c : impl.cdf) c /= total;
  for (auto& p : impl.pdf) p /= total;
}

double draw_positive_exponential(Engine& engine, double rate) {
  for (;;) {
    const double x = -std::log(uniform_open0(engine)) / rate;
    if (x > 0.0) return x;
  }
}

}  // namespace

double ssw_mgf(double kappa, double lambda) {
  if (!(kappa > 8.0 / 3.0 && kappa < 8.0)) throw DomainError("ssw law needs 8/3 < kappa < 8");
  if (lambda >= ssw_lambda0(kappa)) throw DomainError("lambda outside the domain of the ssw moment generating function");
  return ssw_mgf_generic(kappa, std::complex<double>(lambda, 0.0)).real();
}

double ssw_lambda0(double kappa) { return 1.0 - 2.0 / kappa - 3.0 * kappa / 32.0; }

IncrementDistribution IncrementDistribution::exponential(double rate) {
  if (!(rate > 0)) throw ArgumentError("exponential rate must be positive");
  auto impl = std::make_shared<Impl>();
  impl->family = IncrementFamily::Exponential;
  impl->rate = rate;
  return IncrementDistribution(std::move(impl));
}

IncrementDistribution IncrementDistribution::gamma(double shape, double rate) {
  if (!(shape > 0 && rate > 0)) throw ArgumentError("gamma shape and rate must be positive");
  auto impl = std::make_shared<Impl>();
  impl->family = IncrementFamily::Gamma;
  impl->shape = shape;
  impl->rate = rate;
  return IncrementDistribution(std::move(impl));
}

IncrementDistribution IncrementDistribution::ssw_cle(double kappa) {
  if (!(kappa > 8.0 / 3.0 && kappa < 8.0)) throw ArgumentError("ssw law needs 8/3 < kappa < 8");
  auto impl = std::make_shared<Impl>();
  impl->family = IncrementFamily::SswCle;
  impl->kappa = kappa;
  tabulate_ssw(*impl);
  return IncrementDistribution(std::move(impl));
}

IncrementDistribution IncrementDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ArgumentError("empirical law needs samples");
  for (double s : samples)
    if (!(s > 0)) throw ArgumentError("empirical increments must be strictly positive");
  auto impl = std::make_shared<Impl>();
  impl->family = IncrementFamily::Empirical;
  impl->samples = std::move(samples);
  return IncrementDistribution(std::move(impl));
}

IncrementDistribution IncrementDistribution::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw ConfigurationError("empty distribution name");
  auto num = [&](std::size_t i, double fallback) {
    if (i >= parts.size()) return fallback;
    try {
      return std::stod(parts[i]);
    } catch (const std::exception&) {
      throw ConfigurationError("bad number '" + parts[i] + "' in distribution '" + std::string(text) + "'");
    }
  };
  if (parts[0] == "exp") return exponential(num(1, 1.0));
  if (parts[0] == "gamma") return gamma(num(1, 2.0), num(2, 1.0));
  if (parts[0] == "ssw") {
    if (parts.size() < 2) throw ConfigurationError("ssw needs a kappa, e.g. ssw:6");
    return ssw_cle(num(1, 6.0));
  }
  throw ConfigurationError("unknown distribution '" + std::string(text) + "'");
}

IncrementFamily IncrementDistribution::family() const { return impl_->family; }

std::string IncrementDistribution::name() const {
  std::ostringstream os;
  switch (impl_->family) {
    case IncrementFamily::Exponential: os << "exp:" << impl_->rate; break;
    case IncrementFamily::Gamma: os << "gamma:" << impl_->shape << ':' << impl_->rate; break;
    case IncrementFamily::SswCle: os << "ssw:" << impl_->kappa; break;
    case IncrementFamily::Empirical: os << "empirical:" << impl_->samples.size(); break;
  }
  return os.str();
}

double IncrementDistribution::lambda0() const {
  switch (impl_->family) {
    case IncrementFamily::Exponential:
    case IncrementFamily::Gamma: return impl_->rate;
    case IncrementFamily::SswCle: return ssw_lambda0(impl_->kappa);
    case IncrementFamily::Empirical: return std::numeric_limits<double>::infinity();
  }
  return 0;
}

bool IncrementDistribution::has_density() const { return impl_->family != IncrementFamily::Empirical; }

double IncrementDistribution::density(double x) const {
  const Impl& d = *impl_;
  if (!has_density()) throw UnsupportedDistributionError("empirical law has no density");
  if (!(x > 0)) return 0.0;
  switch (d.family) {
    case IncrementFamily::Exponential: return d.rate * std::exp(-d.rate * x);
    case IncrementFamily::Gamma:
      return std::exp(d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(x) - d.rate * x - std::lgamma(d.shape));
    case IncrementFamily::SswCle: {
      const double pos = x / d.dx;
      const auto j = static_cast<std::size_t>(pos);
      if (j + 1 >= d.pdf.size()) return 0.0;
      const double w = pos - static_cast<double>(j);
      return (1.0 - w) * d.pdf[j] + w * d.pdf[j + 1];
    }
    case IncrementFamily::Empirical: break;
  }
  return 0.0;
}

double IncrementDistribution::sample(Engine& engine) const {
  const Impl& d = *impl_;
  switch (d.family) {
    case IncrementFamily::Exponential: return draw_positive_exponential(engine, d.rate);
    case IncrementFamily::Gamma: {
      std::gamma_distribution<double> g(d.shape, 1.0 / d.rate);
      for (;;) {
        const double x = g(engine);
        if (x > 0.0) return x;
      }
    }
    case IncrementFamily::SswCle: {
      const double u = uniform_open0(engine);
      auto it = std::lower_bound(d.cdf.begin(), d.cdf.end(), u);
      if (it == d.cdf.end()) --it;
      const auto j = static_cast<std::size_t>(it - d.cdf.begin());
      const double c0 = d.cdf[j - 1];
      const double c1 = d.cdf[j];
      const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 1.0;
      const double x = (static_cast<double>(j - 1) + w) * d.dx;
      return x > 0.0 ? x : 0.5 * d.dx;
    }
    case IncrementFamily::Empirical: {
      const auto n = d.samples.size();
      return d.samples[static_cast<std::size_t>(uniform01(engine) * static_cast<double>(n)) % n];
    }
  }
  return 0.0;
}

double IncrementDistribution::mgf(double lambda) const {
  const Impl& d = *impl_;
  if (lambda >= lambda0()) throw DomainError("lambda is outside the domain of the moment generating function");
  switch (d.family) {
    case IncrementFamily::Exponential: return d.rate / (d.rate - lambda);
    case IncrementFamily::Gamma: return std::pow(1.0 - lambda / d.rate, -d.shape);
    case IncrementFamily::SswCle: return ssw_mgf(d.kappa, lambda);
    case IncrementFamily::Empirical: {
      std::vector<double> e(d.samples.size());
      std::transform(d.samples.begin(), d.samples.end(), e.begin(), [lambda](double x) { return std::exp(lambda * x); });
      return stats::mean(e);
    }
  }
  return 0.0;
}

double IncrementDistribution::log_mgf_derivative_at_zero() const {
  const Impl& d = *impl_;
  switch (d.family) {
    case IncrementFamily::Exponential: return 1.0 / d.rate;
    case IncrementFamily::Gamma: return d.shape / d.rate;
    case IncrementFamily::SswCle: {
      const double h = 1e-5;
      return (log_mgf(h) - log_mgf(-h)) / (2.0 * h);
    }
    case IncrementFamily::Empirical: return stats::mean(d.samples);
  }
  return 0.0;
}

double IncrementDistribution::log_mgf_second_derivative_at_zero() const {
  const Impl& d = *impl_;
  switch (d.family) {
    case IncrementFamily::Exponential: return 1.0 / (d.rate * d.rate);
    case IncrementFamily::Gamma: return d.shape / (d.rate * d.rate);
    case IncrementFamily::SswCle: {
      const double h = 1e-4;
      return (log_mgf(h) - 2.0 * log_mgf(0.0) + log_mgf(-h)) / (h * h);
    }
    case IncrementFamily::Empirical: {
      const double m = stats::mean(d.samples);
      double s = 0;
      for (double x : d.samples) s += (x - m) * (x - m);
      return s / static_cast<double>(d.samples.size());
    }
  }
  return 0.0;
}

PassageSummary first_passage_summary(const IncrementDistribution& dist, double x, Engine& engine) {
  if (!(x >= 0)) throw ArgumentError("first passage level must be non-negative");
  PassageSummary out;
  double s = 0.0;
  while (s < x) {
    s += dist.sample(engine);
    ++out.tau;
  }
  out.overshoot = s - x;
  return out;
}

FirstPassage first_passage(const IncrementDistribution& dist, double x, std::uint64_t seed) {
  if (!(x >= 0)) throw ArgumentError("first passage level must be non-negative");
  Engine engine = make_engine(seed);
  FirstPassage out;
  out.path.seed = seed;
  out.path.partial_sums.push_back(0.0);
  double s = 0.0;
  while (s < x) {
    const double step = dist.sample(engine);
    s += step;
    out.path.increments.push_back(step);
    out.path.partial_sums.push_back(s);
  }
  out.tau = static_cast<std::int64_t>(out.path.increments.size());
  out.overshoot = s - x;
  return out;
}

std::vector<SurvivalPoint> overshoot_tail_estimate(const IncrementDistribution& dist, double x,
                                                   std::span<const double> alpha_grid, std::size_t paths,
                                                   std::uint64_t seed, std::optional<double> z) {
  if (paths < 10000) throw ArgumentError("overshoot tail estimate needs at least 10^4 paths");
  const double zq = z.value_or(
      stats::normal_quantile(1.0 - 0.01 / (2.0 * static_cast<double>(std::max<std::size_t>(alpha_grid.size(), 1)))));
  Engine engine = make_engine(seed);
  std::vector<double> over(paths);
  for (auto& o : over) o = first_passage_summary(dist, x, engine).overshoot;
  std::sort(over.begin(), over.end());
  std::vector<SurvivalPoint> out;
  for (double alpha : alpha_grid) {
    const auto below = static_cast<std::size_t>(std::lower_bound(over.begin(), over.end(), alpha) - over.begin());
    const std::size_t k = paths - below;
    out.push_back({alpha, static_cast<double>(k) / static_cast<double>(paths), stats::wilson_interval(k, paths, zq)});
  }
  return out;
}

TauMomentTable tau_moment_check(const IncrementDistribution& dist, std::span<const double> x_grid, int j,
                                std::size_t paths, std::uint64_t seed) {
  if (j < 1 || j > 3) throw ArgumentError("tau moment order must be 1, 2 or 3");
  if (paths < 2) throw ArgumentError("tau moment check needs at least two paths");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (!(x_grid[i] > x_grid[i - 1])) throw ArgumentError("x grid must be increasing");
  const double scale = dist.log_mgf_derivative_at_zero();
  TauMomentTable table;
  table.j = j;
  std::vector<double> v(paths);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    Engine engine = make_engine(derive_seed(seed, "tau-moment", i));
    for (auto& value : v) value = std::pow(scale * static_cast<double>(first_passage_summary(dist, x_grid[i], engine).tau), j);
    TauMomentRow row;
    row.x = x_grid[i];
    row.moment = stats::mean(v);
    row.se = stats::standard_error(v);
    row.residual = row.moment - std::pow(row.x, j);
    table.rows.push_back(row);
  }
  std::vector<double> lx, ly;
  for (const auto& row : table.rows) {
    if (row.residual == 0.0) continue;
    lx.push_back(std::log(row.x + 1.0));
    ly.push_back(std::log(std::abs(row.residual)));
  }
  if (lx.size() >= 2) {
    table.growth = stats::fit_line(lx, ly);
  } else {
    table.growth.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

double default_coupling_window(const IncrementDistribution& dist, std::uint64_t seed, std::size_t pilot) {
  Engine engine = make_engine(seed);
  const double level = 20.0 * dist.log_mgf_derivative_at_zero();
  std::vector<double> over(pilot);
  for (auto& o : over) o = first_passage_summary(dist, level, engine).overshoot;
  std::sort(over.begin(), over.end());
  const std::size_t k = (pilot + 1) / 2 - 1;
  return 0.5 * over[k];
}

std::pair<double, double> maximal_coupling(const IncrementDistribution& dist, double lo, double hi, Engine& engine) {
  if (!dist.has_density()) throw UnsupportedDistributionError("maximal coupling needs a density");
  auto p = [&](double s) { return dist.density(s - lo); };
  auto q = [&](double s) { return dist.density(s - hi); };
  const double x = lo + dist.sample(engine);
  if (uniform01(engine) * p(x) < q(x)) return {x, x};
  for (std::size_t tries = 0; tries < 100000000; ++tries) {
    const double y = hi + dist.sample(engine);
    if (uniform01(engine) * q(y) >= p(y)) return {x, y};
  }
  throw std::runtime_error("maximal coupling rejection loop did not terminate");
}

double coupling_overlap(const IncrementDistribution& dist, double gap) {
  if (!dist.has_density()) throw UnsupportedDistributionError("coupling overlap needs a density");
  if (gap <= 0.0) return 1.0;
  if (dist.family() == IncrementFamily::Exponential) return std::exp(-gap / dist.log_mgf_derivative_at_zero());
  // Simpson rule on min(f(s), f(s - gap)) over s in (gap, gap + upper).
  const double mean = dist.log_mgf_derivative_at_zero();
  const double sd = std::sqrt(dist.log_mgf_second_derivative_at_zero());
  const double upper = mean + 40.0 * sd;
  const int n = 40000;
  const double h = upper / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = gap + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::min(dist.density(s), dist.density(s - gap));
  }
  return std::min(1.0, sum * h / 3.0);
}

CouplingResult coalescing_coupling(const IncrementDistribution& dist, double a, double b, double M,
                                   std::uint64_t seed, CouplingOptions options) {
  if (!dist.has_density()) throw UnsupportedDistributionError("coalescing coupling needs a law with a density");
  if (!(0.0 <= a && a <= b && b <= M)) throw ArgumentError("coupling needs 0 <= a <= b <= M");
  CouplingResult out;
  out.theta = options.theta ? *options.theta : default_coupling_window(dist, derive_seed(seed, "coupling-window", 0));
  Engine engine = make_engine(seed);
  RenewalPath& pa = out.path_a;
  RenewalPath& pb = out.path_b;
  pa.seed = pb.seed = seed;
  pa.partial_sums.push_back(a);
  pb.partial_sums.push_back(b);
  double sa = a, sb = b;
  bool merged = a == b;
  if (merged) out.coalesce_height = a;
  std::optional<double> first_a, first_b;
  if (sa >= M) first_a = sa;
  if (sb >= M) first_b = sb;
  auto push = [](RenewalPath& p, double& s, double next) {
    p.increments.push_back(next - s);
    p.partial_sums.push_back(next);
    s = next;
  };
  while (!(first_a && first_b && pa.increments.size() >= options.min_steps && pb.increments.size() >= options.min_steps)) {
    if (merged) {
      const double next = sa + dist.sample(engine);
      push(pa, sa, next);
      push(pb, sb, next);
    } else {
      const bool a_low = sa <= sb;
      double& lo = a_low ? sa : sb;
      RenewalPath& plo = a_low ? pa : pb;
      RenewalPath& phi = a_low ? pb : pa;
      double& hi = a_low ? sb : sa;
      if (hi - lo >= out.theta) {
        push(plo, lo, lo + dist.sample(engine));
      } else {
        if (!(first_a || first_b)) ++out.attempts;
        const auto [x, y] = maximal_coupling(dist, lo, hi, engine);
        push(plo, lo, x);
        push(phi, hi, y);
        if (x == y) {
          merged = true;
          out.coalesce_height = x;
        }
      }
    }
    if (!first_a && sa >= M) first_a = sa;
    if (!first_b && sb >= M) first_b = sb;
  }
  out.coalesced = *first_a == *first_b;
  if (!out.coalesced) out.coalesce_height.reset();
  return out;
}

NonCoalescenceEstimate estimate_non_coalescence(const IncrementDistribution& dist, double a, double b, double M,
                                                std::size_t trials, std::uint64_t seed, double theta,
                                                std::size_t weighted_trials) {
  if (!dist.has_density()) throw UnsupportedDistributionError("coalescing coupling needs a law with a density");
  NonCoalescenceEstimate est;
  est.M = M;
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    CouplingOptions opts;
    opts.theta = theta;
    failures += coalescing_coupling(dist, a, b, M, derive_seed(seed, "coupling-direct", t), opts).coalesced ? 0 : 1;
  }
  const double n = static_cast<double>(trials);
  est.direct = static_cast<double>(failures) / n;
  est.direct_se = std::sqrt(est.direct * (1.0 - est.direct) / n);

  // Forced failures: every attempt draws from the residual parts of the two
  // densities and the trial carries the product of failure probabilities.
  if (weighted_trials == 0) weighted_trials = trials;
  const bool exponential = dist.family() == IncrementFamily::Exponential;
  const double rate = 1.0 / dist.log_mgf_derivative_at_zero();
  std::vector<double> weights(weighted_trials);
  for (std::size_t t = 0; t < weighted_trials; ++t) {
    Engine engine = make_engine(derive_seed(seed, "coupling-weighted", t));
    double sa = a, sb = b, w = 1.0;
    while (sa < M && sb < M && w > 0.0) {
      double& lo = sa <= sb ? sa : sb;
      double& hi = sa <= sb ? sb : sa;
      const double gap = hi - lo;
      if (gap >= theta) {
        lo += dist.sample(engine);
        continue;
      }
      w *= 1.0 - coupling_overlap(dist, gap);
      if (w <= 0.0) break;
      double x, y;
      if (exponential) {
        // Residual of the lower density: truncated to (lo, hi). Residual of the
        // upper one: the law itself shifted to hi.
        x = lo - std::log1p(-uniform01(engine) * -std::expm1(-rate * gap)) / rate;
        y = hi + dist.sample(engine);
      } else {
        auto p = [&](double s) { return dist.density(s - lo); };
        auto q = [&](double s) { return dist.density(s - hi); };
        do x = lo + dist.sample(engine);
        while (uniform01(engine) * p(x) < q(x));
        do y = hi + dist.sample(engine);
        while (uniform01(engine) * q(y) < p(y));
      }
      lo = x;
      hi = y;
    }
    weights[t] = w;
  }
  est.weighted = stats::mean(weights);
  est.weighted_se = stats::standard_error(weights);
  return est;
}

}  // namespace cle
