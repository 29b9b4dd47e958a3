#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace quasiquad {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Rotate by +90 degrees: (x,y) -> (-y,x).
inline Vec2 rot90(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Sign-exact orientation test: > 0 iff c lies left of the line a->b.
// Filtered double evaluation with an exact expansion-arithmetic fallback.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

// Sign-exact incircle test for CCW triangle (a,b,c): > 0 iff d strictly inside
// the circumcircle.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Signed angle from a to b in (-pi, pi].
double angle_between(const Vec2& a, const Vec2& b);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

struct BBox {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  void expand(const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const BBox& o) {
    lo = lo.cwiseMin(o.lo);
    hi = hi.cwiseMax(o.hi);
  }
  double diag() const { return (hi - lo).norm(); }
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

double polygon_signed_area(const std::vector<Vec2>& poly);

// Even-odd crossing test; works for a region given as several loops
// (outer + holes) by concatenation since only parity matters.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);
bool point_in_loops(const Vec2& p, const std::vector<std::vector<Vec2>>& loops);

// Polyline utilities. A polyline is an ordered point list; arclength
// parameters are cumulative distances from the first point.
double polyline_length(const std::vector<Vec2>& pts);
std::vector<double> polyline_cumlen(const std::vector<Vec2>& pts);
Vec2 polyline_point_at(const std::vector<Vec2>& pts, const std::vector<double>& cum, double s);

// Closest point on the polyline; returns its arclength parameter.
struct PolylineProjection {
  Vec2 point;
  double arclength;
  double distance;
};
PolylineProjection polyline_project(const std::vector<Vec2>& pts, const Vec2& p);

double polyline_distance(const std::vector<Vec2>& pts, const Vec2& p);

}  // namespace quasiquad
