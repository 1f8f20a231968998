#pragma once

#include <complex>
#include <span>
#include <vector>

namespace cle {

// A field sampled on an n x n grid of the unit torus (row-major, x fastest)
// and its Fourier coefficients
//   f^(k) = n^-2 sum_j f(x_j) exp(-2 pi i k . x_j),
// kept for the frequencies k in [-n/2, n/2)^2 with |k|_inf <= cutoff.
class SpectralField {
 public:
  // cutoff < 0 means n / 2.
  static SpectralField from_real(std::span<const double> values, int n, int cutoff = -1);
  static SpectralField from_complex(std::span<const std::complex<double>> values, int n, int cutoff = -1);

  int n() const { return n_; }
  int cutoff() const { return cutoff_; }
  // Coefficient of k; any integer k is reduced to its representative in
  // [-n/2, n/2). Zero outside the cutoff.
  std::complex<double> coefficient(int kx, int ky) const;

  // Grid L2 norm, (n^-2 sum |f|^2)^(1/2).
  double l2_norm() const { return l2_; }

 private:
  int n_ = 0;
  int cutoff_ = 0;
  double l2_ = 0;
  std::vector<std::complex<double>> coeff_;  // FFT order, ky * n + kx
};

// (sum_{|k|_inf <= K} <k>^{2s} |f^(k)|^2)^(1/2) with <k> = (1 + |k|^2)^(1/2).
double sobolev_norm(const SpectralField& field, double s);

// Smooth bump exp(1 - 1 / (1 - (r/radius)^2)) on |x| < radius, 0 outside.
double bump(double x, double y, double radius);

}  // namespace cle
