#include "quasiquad/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace quasiquad {

// Expansion arithmetic after Shewchuk: a multiprecision value is a sum of
// nonoverlapping doubles ordered by increasing magnitude. Used only when the
// floating-point filter cannot certify a predicate sign.
namespace {

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  double bv = x - a;
  double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& x, double& y) {
  // requires |a| >= |b|
  x = a + b;
  double bv = x - a;
  y = b - bv;
}

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  double bv = a - x;
  double av = x + bv;
  y = (a - av) + (bv - b);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

using Expansion = std::vector<double>;

Expansion expansion_from_diff(double a, double b) {
  double x, y;
  two_diff(a, b, x, y);
  Expansion e;
  if (y != 0.0) e.push_back(y);
  if (x != 0.0) e.push_back(x);
  if (e.empty()) e.push_back(0.0);
  return e;
}

Expansion scale_expansion(const Expansion& e, double b) {
  Expansion h;
  h.reserve(2 * e.size());
  double Q, hh;
  two_product(e[0], b, Q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (size_t i = 1; i < e.size(); ++i) {
    double p1, p0, sum;
    two_product(e[i], b, p1, p0);
    two_sum(Q, p0, sum, hh);
    if (hh != 0.0) h.push_back(hh);
    fast_two_sum(p1, sum, Q, hh);
    if (hh != 0.0) h.push_back(hh);
  }
  if (Q != 0.0 || h.empty()) h.push_back(Q);
  return h;
}

Expansion expansion_sum(const Expansion& e, const Expansion& f) {
  // fast-expansion-sum with zero elimination
  Expansion h;
  h.reserve(e.size() + f.size());
  size_t ei = 0, fi = 0;
  double enow = e[0], fnow = f[0];
  double Q;
  if ((fnow > enow) == (fnow > -enow)) {
    Q = enow;
    ++ei;
  } else {
    Q = fnow;
    ++fi;
  }
  double Qnew, hh;
  while (ei < e.size() && fi < f.size()) {
    enow = e[ei];
    fnow = f[fi];
    if ((fnow > enow) == (fnow > -enow)) {
      two_sum(Q, enow, Qnew, hh);
      ++ei;
    } else {
      two_sum(Q, fnow, Qnew, hh);
      ++fi;
    }
    Q = Qnew;
    if (hh != 0.0) h.push_back(hh);
  }
  while (ei < e.size()) {
    two_sum(Q, e[ei++], Qnew, hh);
    Q = Qnew;
    if (hh != 0.0) h.push_back(hh);
  }
  while (fi < f.size()) {
    two_sum(Q, f[fi++], Qnew, hh);
    Q = Qnew;
    if (hh != 0.0) h.push_back(hh);
  }
  if (Q != 0.0 || h.empty()) h.push_back(Q);
  return h;
}

Expansion expansion_negate(Expansion e) {
  for (double& c : e) c = -c;
  return e;
}

Expansion expansion_mul(const Expansion& e, const Expansion& f) {
  Expansion acc{0.0};
  for (double c : f) {
    if (c == 0.0) continue;
    acc = expansion_sum(acc, scale_expansion(e, c));
  }
  return acc;
}

double expansion_sign(const Expansion& e) {
  // largest-magnitude component is last and dominates the tail
  double top = e.back();
  if (top > 0.0) return 1.0;
  if (top < 0.0) return -1.0;
  return 0.0;
}

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
const double kCcwErrBound = (3.0 + 16.0 * kEps) * kEps;
const double kIccErrBound = (10.0 + 96.0 * kEps) * kEps;

double orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  Expansion acx = expansion_from_diff(a.x(), c.x());
  Expansion acy = expansion_from_diff(a.y(), c.y());
  Expansion bcx = expansion_from_diff(b.x(), c.x());
  Expansion bcy = expansion_from_diff(b.y(), c.y());
  Expansion det = expansion_sum(expansion_mul(acx, bcy), expansion_negate(expansion_mul(acy, bcx)));
  return expansion_sign(det);
}

double incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  Expansion adx = expansion_from_diff(a.x(), d.x());
  Expansion ady = expansion_from_diff(a.y(), d.y());
  Expansion bdx = expansion_from_diff(b.x(), d.x());
  Expansion bdy = expansion_from_diff(b.y(), d.y());
  Expansion cdx = expansion_from_diff(c.x(), d.x());
  Expansion cdy = expansion_from_diff(c.y(), d.y());

  Expansion alift = expansion_sum(expansion_mul(adx, adx), expansion_mul(ady, ady));
  Expansion blift = expansion_sum(expansion_mul(bdx, bdx), expansion_mul(bdy, bdy));
  Expansion clift = expansion_sum(expansion_mul(cdx, cdx), expansion_mul(cdy, cdy));

  Expansion bxcy = expansion_sum(expansion_mul(bdx, cdy), expansion_negate(expansion_mul(cdx, bdy)));
  Expansion cxay = expansion_sum(expansion_mul(cdx, ady), expansion_negate(expansion_mul(adx, cdy)));
  Expansion axby = expansion_sum(expansion_mul(adx, bdy), expansion_negate(expansion_mul(bdx, ady)));

  Expansion det = expansion_sum(
      expansion_sum(expansion_mul(alift, bxcy), expansion_mul(blift, cxay)),
      expansion_mul(clift, axby));
  return expansion_sign(det);
}

}  // namespace

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  double detleft = (a.x() - c.x()) * (b.y() - c.y());
  double detright = (a.y() - c.y()) * (b.x() - c.x());
  double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return det;
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return det;
    detsum = -detleft - detright;
  } else {
    return det;
  }
  double errbound = kCcwErrBound * detsum;
  if (det >= errbound || -det >= errbound) return det;
  return orient2d_exact(a, b, c);
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  double adx = a.x() - d.x(), ady = a.y() - d.y();
  double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  double cdx = c.x() - d.x(), cdy = c.y() - d.y();

  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;
  double alift = adx * adx + ady * ady;
  double blift = bdx * bdx + bdy * bdy;
  double clift = cdx * cdx + cdy * cdy;

  double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                     (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                     (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  double errbound = kIccErrBound * permanent;
  if (det > errbound || -det > errbound) return det;
  return incircle_exact(a, b, c, d);
}

double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(cross2(a, b), a.dot(b));
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double polygon_signed_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    s += cross2(p, q);
  }
  return 0.5 * s;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double xint = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < xint) inside = !inside;
    }
  }
  return inside;
}

bool point_in_loops(const Vec2& p, const std::vector<std::vector<Vec2>>& loops) {
  bool inside = false;
  for (const auto& loop : loops)
    if (point_in_polygon(p, loop)) inside = !inside;
  return inside;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double s = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
  return s;
}

std::vector<double> polyline_cumlen(const std::vector<Vec2>& pts) {
  std::vector<double> cum(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  return cum;
}

Vec2 polyline_point_at(const std::vector<Vec2>& pts, const std::vector<double>& cum, double s) {
  if (s <= 0.0) return pts.front();
  if (s >= cum.back()) return pts.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  size_t i = static_cast<size_t>(it - cum.begin());
  double seg = cum[i] - cum[i - 1];
  double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
  return pts[i - 1] + t * (pts[i] - pts[i - 1]);
}

PolylineProjection polyline_project(const std::vector<Vec2>& pts, const Vec2& p) {
  PolylineProjection best{pts.front(), 0.0, (p - pts.front()).norm()};
  double cum = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    Vec2 ab = pts[i + 1] - pts[i];
    double len = ab.norm();
    double t = 0.0;
    if (len > 0.0) t = std::clamp((p - pts[i]).dot(ab) / (len * len), 0.0, 1.0);
    Vec2 q = pts[i] + t * ab;
    double d = (p - q).norm();
    if (d < best.distance) best = {q, cum + t * len, d};
    cum += len;
  }
  return best;
}

double polyline_distance(const std::vector<Vec2>& pts, const Vec2& p) {
  if (pts.size() == 1) return (p - pts.front()).norm();
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
  return best;
}

}  // namespace quasiquad
