#include "quasiquad/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace quasiquad {

void TriMesh::build_edges() {
  edges.clear();
  tri_edges.assign(tris.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> lookup;
  for (size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = tris[t][k], b = tris[t][(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.a = key.first;
        e.b = key.second;
        e.t0 = static_cast<int>(t);
        lookup[key] = static_cast<int>(edges.size());
        tri_edges[t][k] = static_cast<int>(edges.size());
        edges.push_back(e);
      } else {
        Edge& e = edges[it->second];
        if (e.t1 >= 0) throw std::runtime_error("non-manifold edge: more than 2 adjacent triangles");
        e.t1 = static_cast<int>(t);
        tri_edges[t][k] = it->second;
      }
    }
  }
}

double TriMesh::tri_area(int t) const {
  const Vec2& a = points[tris[t][0]];
  const Vec2& b = points[tris[t][1]];
  const Vec2& c = points[tris[t][2]];
  return 0.5 * cross2(b - a, c - a);
}

Vec2 TriMesh::tri_centroid(int t) const {
  return (points[tris[t][0]] + points[tris[t][1]] + points[tris[t][2]]) / 3.0;
}

Vec2 TriMesh::edge_tangent(int e) const {
  Vec2 d = points[edges[e].b] - points[edges[e].a];
  double n = d.norm();
  return n > 0.0 ? Vec2(d / n) : Vec2(1.0, 0.0);
}

int TriMesh::opposite_vertex(int e, int t) const {
  for (int v : tris[t])
    if (v != edges[e].a && v != edges[e].b) return v;
  throw std::runtime_error("edge not part of triangle");
}

void check_conforming(const TriMesh& m) {
  for (size_t t = 0; t < m.tris.size(); ++t)
    if (m.tri_area(static_cast<int>(t)) <= 0.0)
      throw std::runtime_error("triangle " + std::to_string(t) + " not positively oriented");
  for (const auto& e : m.edges)
    if (e.t0 < 0) throw std::runtime_error("edge without adjacent triangle");
}

int euler_characteristic_tri(const TriMesh& m) {
  return static_cast<int>(m.points.size()) - static_cast<int>(m.edges.size()) +
         static_cast<int>(m.tris.size());
}

TriLocator::TriLocator(const TriMesh& m) : mesh_(&m) {
  for (const auto& p : m.points) box_.expand(p);
  double diag = std::max(box_.diag(), 1e-300);
  box_.lo -= Vec2(1e-9 * diag, 1e-9 * diag);
  box_.hi += Vec2(1e-9 * diag, 1e-9 * diag);
  int target = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(m.tris.size()))));
  nx_ = ny_ = target;
  cw_ = (box_.hi.x() - box_.lo.x()) / nx_;
  ch_ = (box_.hi.y() - box_.lo.y()) / ny_;
  if (cw_ <= 0.0) cw_ = 1.0;
  if (ch_ <= 0.0) ch_ = 1.0;
  cells_.assign(static_cast<size_t>(nx_) * ny_, {});
  for (size_t t = 0; t < m.tris.size(); ++t) {
    BBox tb;
    for (int v : m.tris[t]) tb.expand(m.points[v]);
    int x0, y0, x1, y1;
    cell_of(tb.lo, x0, y0);
    cell_of(tb.hi, x1, y1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) cells_[static_cast<size_t>(y) * nx_ + x].push_back(static_cast<int>(t));
  }
}

void TriLocator::cell_of(const Vec2& p, int& cx, int& cy) const {
  cx = std::clamp(static_cast<int>((p.x() - box_.lo.x()) / cw_), 0, nx_ - 1);
  cy = std::clamp(static_cast<int>((p.y() - box_.lo.y()) / ch_), 0, ny_ - 1);
}

static bool tri_bary(const TriMesh& m, int t, const Vec2& p, std::array<double, 3>& bary) {
  const Vec2& a = m.points[m.tris[t][0]];
  const Vec2& b = m.points[m.tris[t][1]];
  const Vec2& c = m.points[m.tris[t][2]];
  double area = cross2(b - a, c - a);
  if (area <= 0.0) return false;
  double w0 = cross2(b - p, c - p) / area;
  double w1 = cross2(c - p, a - p) / area;
  double w2 = 1.0 - w0 - w1;
  bary = {w0, w1, w2};
  double tol = -1e-12;
  return w0 >= tol && w1 >= tol && w2 >= tol;
}

static double tri_distance(const TriMesh& m, int t, const Vec2& p) {
  std::array<double, 3> bary;
  if (tri_bary(m, t, p, bary)) return 0.0;
  double d = std::numeric_limits<double>::max();
  for (int k = 0; k < 3; ++k)
    d = std::min(d, point_segment_distance(p, m.points[m.tris[t][k]], m.points[m.tris[t][(k + 1) % 3]]));
  return d;
}

int TriLocator::try_cell(int cx, int cy, const Vec2& p, std::array<double, 3>& bary) const {
  for (int t : cells_[static_cast<size_t>(cy) * nx_ + cx])
    if (tri_bary(*mesh_, t, p, bary)) return t;
  return -1;
}

int TriLocator::locate(const Vec2& p, std::array<double, 3>& bary) const {
  // every triangle is registered in all cells its bbox overlaps, so a
  // containing triangle is always found in p's own cell
  if (box_.contains(p)) {
    int cx, cy;
    cell_of(p, cx, cy);
    int t = try_cell(cx, cy, p, bary);
    if (t >= 0) return t;
  }
  double best = std::numeric_limits<double>::max();
  int best_t = -1;
  for (size_t t = 0; t < mesh_->tris.size(); ++t) {
    double d = tri_distance(*mesh_, static_cast<int>(t), p);
    if (d < best) {
      best = d;
      best_t = static_cast<int>(t);
    }
  }
  if (best_t < 0) throw std::runtime_error("locate on empty mesh");
  tri_bary(*mesh_, best_t, p, bary);
  for (double& w : bary) w = std::clamp(w, 0.0, 1.0);
  double s = bary[0] + bary[1] + bary[2];
  if (s > 0.0)
    for (double& w : bary) w /= s;
  return best_t;
}

bool TriLocator::inside(const Vec2& p) const {
  if (!box_.contains(p)) return false;
  int cx, cy;
  cell_of(p, cx, cy);
  std::array<double, 3> bary;
  return try_cell(cx, cy, p, bary) >= 0;
}

double SizeField::interpolate(const TriLocator& loc, const Vec2& p) const {
  std::array<double, 3> bary;
  int t = loc.locate(p, bary);
  double v = 0.0;
  for (int k = 0; k < 3; ++k) v += bary[k] * values[mesh->tris[t][k]];
  return v;
}

}  // namespace quasiquad
