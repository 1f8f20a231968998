#pragma once

#include "cle/topology.hpp"

namespace cle {

// Dirichlet Green's function of the unit disk, log|1 - conj(u) v| / |u - v|
// over 2 pi. SingularityError for u = v, DomainError outside the disk.
double greens_disk(Point u, Point v);

struct KoebeBounds {
  double inrad = 0;
  double confrad = 0;
  double upper = 0;  // 4 * inrad
};

// In-radius and conformal radius of the unit disk seen from z.
KoebeBounds koebe_bounds(Point z);

}  // namespace cle
