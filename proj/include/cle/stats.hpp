#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cle::stats {

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double slope_se = 0;
  double intercept_se = 0;
  double chi2 = 0;  // weighted fits only
  std::size_t n = 0;
};

// Ordinary least squares y = intercept + slope * x. slope_se is the usual
// residual-based standard error.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Weighted least squares with known standard deviations of y. slope_se is the
// propagated error, scaled by sqrt(chi2 / dof) when that exceeds one.
LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma);

// Summation in a fixed binary-tree order, so reductions are reproducible.
double pairwise_sum(std::span<const double> v);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double standard_error(std::span<const double> v);
double median(std::vector<double> v);

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z);

double normal_quantile(double p);

struct KsResult {
  double statistic = 0;
  double p_value = 0;
  double critical_1pct = 0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// Against a continuous CDF.
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov survival function Q(lambda) = P[K > lambda].
double kolmogorov_survival(double lambda);

// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, double dof);

// Integrated autocorrelation time with Sokal's automatic window (W >= c * tau).
double integrated_autocorrelation_time(std::span<const double> series, double window_c = 5.0);

}  // namespace cle::stats
