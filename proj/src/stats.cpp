#include "cle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace cle::stats {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
  return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  LinearFit fit;
  fit.n = x.size();
  if (fit.n < 2) return fit;
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  fit.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  if (fit.n > 2) {
    const double s2 = sse / static_cast<double>(fit.n - 2);
    fit.slope_se = std::sqrt(s2 / sxx);
    double sx2 = 0;
    for (double xi : x) sx2 += xi * xi;
    fit.intercept_se = std::sqrt(s2 * sx2 / (static_cast<double>(fit.n) * sxx));
  }
  return fit;
}

LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size())
    throw std::invalid_argument("fit_line_weighted: size mismatch");
  LinearFit fit;
  fit.n = x.size();
  if (fit.n < 2) return fit;
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double delta = s * sxx - sx * sx;
  fit.slope = (s * sxy - sx * sy) / delta;
  fit.intercept = (sxx * sy - sx * sxy) / delta;
  fit.slope_se = std::sqrt(s / delta);
  fit.intercept_se = std::sqrt(sxx / delta);
  const double ybar = sy / s;
  double chi2 = 0, tss = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w * r * r;
    tss += w * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.chi2 = chi2;
  fit.r2 = tss > 0 ? 1.0 - chi2 / tss : 1.0;
  if (fit.n > 2) {
    const double reduced = chi2 / static_cast<double>(fit.n - 2);
    if (reduced > 1.0) {
      fit.slope_se *= std::sqrt(reduced);
      fit.intercept_se *= std::sqrt(reduced);
    }
  }
  return fit;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical_1pct = 1.628 * std::sqrt((na + nb) / (na * nb));
  return r;
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  KsResult r;
  r.statistic = d;
  const double sq = std::sqrt(n);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical_1pct = 1.628 / sq;
  return r;
}

double chi_square_survival(double statistic, double dof) {
  if (statistic <= 0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), statistic));
}

double integrated_autocorrelation_time(std::span<const double> series, double window_c) {
  const std::size_t n = series.size();
  if (n < 4) return 0.5;
  const double m = mean(series);
  double c0 = 0;
  for (double x : series) c0 += (x - m) * (x - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0) return 0.5;
  double tau = 0.5;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (series[i] - m) * (series[i + t] - m);
    ct /= static_cast<double>(n);
    tau += ct / c0;
    if (static_cast<double>(t) >= window_c * tau) break;
  }
  return tau;
}

}  // namespace cle::stats
