#pragma once

// Brute-force geometry used as an independent check of the loop topology.
// Everything here works on Euclidean polygons and cell centres and never looks
// at the containment tree.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cle/loops.hpp"
#include "cle/topology.hpp"

namespace cle::reference {

using Vec = std::array<double, 2>;
using Polygon = std::vector<Vec>;

inline std::vector<Polygon> polygons(const cle::LoopConfiguration& loops) {
  std::vector<Polygon> out;
  for (const auto& loop : loops.loops) {
    Polygon poly;
    for (auto v : loop.vertices) poly.push_back(loops.lattice->polygon_to_euclid(v));
    out.push_back(std::move(poly));
  }
  return out;
}

inline bool contains(const Polygon& poly, Vec p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec a = poly[i];
    const Vec b = poly[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

inline double signed_area(const Polygon& poly) {
  double s = 0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    s += poly[j][0] * poly[i][1] - poly[i][0] * poly[j][1];
  return 0.5 * s;
}

inline double cross(Vec o, Vec a, Vec b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Proper or touching intersection of closed segments.
inline bool segments_meet(Vec p1, Vec p2, Vec q1, Vec q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  const double tol = 1e-12;
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
      ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
    return true;
  auto on = [&](Vec a, Vec b, Vec p, double d) {
    return std::abs(d) <= tol && std::min(a[0], b[0]) - tol <= p[0] && p[0] <= std::max(a[0], b[0]) + tol &&
           std::min(a[1], b[1]) - tol <= p[1] && p[1] <= std::max(a[1], b[1]) + tol;
  };
  return on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4);
}

inline bool polygons_meet(const Polygon& a, const Polygon& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_meet(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
  return false;
}

inline bool segment_crosses(const Polygon& poly, Vec p, Vec q) {
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (segments_meet(p, q, poly[i], poly[(i + 1) % poly.size()])) return true;
  return false;
}

inline Vec centre(const cle::LoopConfiguration& loops, cle::CellIndex c) { return loops.lattice->position(c); }

inline int depth(const std::vector<Polygon>& polys, Vec p) {
  int n = 0;
  for (const auto& poly : polys) n += contains(poly, p) ? 1 : 0;
  return n;
}

inline std::vector<cle::CellIndex> ball_cells(const cle::LoopConfiguration& loops, cle::Point z, double eps) {
  const auto& lat = *loops.lattice;
  const double r = lat.radius();
  const Vec zc{z.x * r, z.y * r};
  std::vector<cle::CellIndex> out{lat.nearest_cell(zc[0], zc[1])};
  for (cle::CellIndex c = 0; c < lat.size(); ++c) {
    const auto p = lat.position(c);
    if (std::hypot(p[0] - zc[0], p[1] - zc[1]) <= eps * r) out.push_back(c);
  }
  return out;
}

inline int surrounding_ball(const cle::LoopConfiguration& loops, const std::vector<Polygon>& polys, cle::Point z,
                            double eps) {
  const auto cells = ball_cells(loops, z, eps);
  int n = 0;
  for (const auto& poly : polys) {
    bool all = true;
    for (auto c : cells) all = all && contains(poly, centre(loops, c));
    n += all ? 1 : 0;
  }
  return n;
}

inline int co_nesting(const cle::LoopConfiguration& loops, const std::vector<Polygon>& polys, cle::Point z,
                      cle::Point w) {
  const auto& lat = *loops.lattice;
  const Vec pz = centre(loops, lat.nearest_cell_unit(z.x, z.y));
  const Vec pw = centre(loops, lat.nearest_cell_unit(w.x, w.y));
  int n = 0;
  for (const auto& poly : polys) n += (contains(poly, pz) && contains(poly, pw)) ? 1 : 0;
  return n;
}

// J indices from segment/polygon crossings of touching cell pairs.
inline cle::JIndices j_indices(const cle::LoopConfiguration& loops, const std::vector<Polygon>& polys, cle::Point z,
                               double r) {
  const auto& lat = *loops.lattice;
  const double rad = lat.radius();
  const Vec zc{z.x * rad, z.y * rad};
  const Vec pz = centre(loops, lat.nearest_cell_unit(z.x, z.y));
  std::vector<std::size_t> around;
  for (std::size_t i = 0; i < polys.size(); ++i)
    if (contains(polys[i], pz)) around.push_back(i);
  // Outermost first: enclosing polygons have larger area.
  std::sort(around.begin(), around.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(signed_area(polys[a])) > std::abs(signed_area(polys[b]));
  });
  cle::JIndices out;
  for (std::size_t j = 0; j < around.size(); ++j) {
    const Polygon& poly = polys[around[j]];
    double lo = 1e300, hi = 0;
    for (cle::CellIndex x = 0; x < lat.size(); ++x) {
      for (int k = 0; k < lat.neighbor_count() / 2; ++k) {
        const cle::CellIndex y = lat.neighbor(x, k);
        if (y < 0) continue;
        const Vec px = centre(loops, x), py = centre(loops, y);
        if (contains(poly, px) == contains(poly, py)) continue;
        if (!segment_crosses(poly, px, py)) continue;
        const double dx = std::hypot(px[0] - zc[0], px[1] - zc[1]);
        const double dy = std::hypot(py[0] - zc[0], py[1] - zc[1]);
        lo = std::min({lo, dx, dy});
        hi = std::max({hi, dx, dy});
      }
    }
    if (!out.cap && lo <= r * rad) out.cap = static_cast<int>(j + 1);
    if (!out.subset && hi <= r * rad) out.subset = static_cast<int>(j + 1);
  }
  return out;
}

}  // namespace cle::reference
