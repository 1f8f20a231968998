#include "cle/greens.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "cle/error.hpp"

namespace cle {

double greens_disk(Point u, Point v) {
  const std::complex<double> a(u.x, u.y), b(v.x, v.y);
  if (!(std::abs(a) < 1.0) || !(std::abs(b) < 1.0)) throw DomainError("Green's function arguments must lie in the unit disk");
  if (a == b) throw SingularityError("Green's function is singular on the diagonal");
  return std::log(std::abs(1.0 - std::conj(a) * b) / std::abs(a - b)) / (2.0 * std::numbers::pi);
}

KoebeBounds koebe_bounds(Point z) {
  const double r = std::hypot(z.x, z.y);
  if (!(r < 1.0)) throw DomainError("point must lie in the unit disk");
  KoebeBounds k{1.0 - r, 1.0 - r * r, 4.0 * (1.0 - r)};
  if (!(k.inrad <= k.confrad && k.confrad <= k.upper)) throw Error("Koebe sandwich violated");
  return k;
}

}  // namespace cle
