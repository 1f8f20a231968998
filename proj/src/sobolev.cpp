#include "cle/sobolev.hpp"

#include <fftw3.h>

#include <cmath>

#include "cle/error.hpp"
#include "cle/stats.hpp"

namespace cle {
namespace {

int representative(int k, int n) {
  int r = ((k % n) + n) % n;
  if (r >= n - n / 2) r -= n;
  return r;
}

}  // namespace

SpectralField SpectralField::from_complex(std::span<const std::complex<double>> values, int n, int cutoff) {
  if (n < 2) throw ArgumentError("spectral grid needs n >= 2");
  const auto m = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (values.size() != m) throw ArgumentError("spectral field size does not match n^2");
  if (cutoff < 0) cutoff = n / 2;
  SpectralField f;
  f.n_ = n;
  f.cutoff_ = cutoff;
  f.coeff_.assign(values.begin(), values.end());
  std::vector<double> sq(m);
  for (std::size_t k = 0; k < m; ++k) sq[k] = std::norm(values[k]);
  f.l2_ = std::sqrt(stats::pairwise_sum(sq) / static_cast<double>(m));

  auto* data = reinterpret_cast<fftw_complex*>(f.coeff_.data());
  fftw_plan plan = fftw_plan_dft_2d(n, n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double norm = 1.0 / static_cast<double>(m);
  for (auto& c : f.coeff_) c *= norm;
  return f;
}

SpectralField SpectralField::from_real(std::span<const double> values, int n, int cutoff) {
  std::vector<std::complex<double>> c(values.begin(), values.end());
  return from_complex(c, n, cutoff);
}

std::complex<double> SpectralField::coefficient(int kx, int ky) const {
  const int rx = representative(kx, n_);
  const int ry = representative(ky, n_);
  if (std::abs(rx) > cutoff_ || std::abs(ry) > cutoff_) return 0.0;
  const int ix = (rx + n_) % n_;
  const int iy = (ry + n_) % n_;
  return coeff_[static_cast<std::size_t>(iy) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(ix)];
}

double sobolev_norm(const SpectralField& field, double s) {
  const int n = field.n();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int ky = -(n / 2); ky < n - n / 2; ++ky) {
    for (int kx = -(n / 2); kx < n - n / 2; ++kx) {
      if (std::abs(kx) > field.cutoff() || std::abs(ky) > field.cutoff()) continue;
      const double bracket2 = 1.0 + static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
      terms.push_back(std::pow(bracket2, s) * std::norm(field.coefficient(kx, ky)));
    }
  }
  return std::sqrt(stats::pairwise_sum(terms));
}

double bump(double x, double y, double radius) {
  const double t = (x * x + y * y) / (radius * radius);
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t));
}

}  // namespace cle
