#include "quasiquad/quality.hpp"

#include <algorithm>

namespace quasiquad {

double sicn_quality(const std::array<Vec2, 4>& q) {
  double mn = 1.0;
  for (int i = 0; i < 4; ++i) {
    Vec2 lp = q[i] - q[(i + 3) & 3];
    Vec2 ln = q[(i + 1) & 3] - q[i];
    double denom = lp.squaredNorm() + ln.squaredNorm();
    double v = denom > 0.0 ? 2.0 * cross2(lp, ln) / denom : 0.0;
    mn = std::min(mn, v);
  }
  return mn;
}

double scaled_jacobian(const std::array<Vec2, 4>& q) {
  double mn = 1.0;
  for (int i = 0; i < 4; ++i) {
    Vec2 lp = q[i] - q[(i + 3) & 3];
    Vec2 ln = q[(i + 1) & 3] - q[i];
    double denom = lp.norm() * ln.norm();
    double v = denom > 0.0 ? cross2(lp, ln) / denom : 0.0;
    mn = std::min(mn, v);
  }
  return mn;
}

double quad_sicn(const QuadMesh& m, int q) { return sicn_quality(m.quad_points(q)); }

MeshQuality mesh_quality(const QuadMesh& m) {
  MeshQuality r;
  if (m.quads.empty()) return r;
  double sum = 0.0;
  r.min_sicn = 1.0;
  for (size_t q = 0; q < m.quads.size(); ++q) {
    double v = quad_sicn(m, static_cast<int>(q));
    sum += v;
    r.min_sicn = std::min(r.min_sicn, v);
  }
  r.avg_sicn = sum / static_cast<double>(m.quads.size());
  return r;
}

}  // namespace quasiquad
