#include "quasiquad/unstructured.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "quasiquad/quality.hpp"
#include "quasiquad/triangulate.hpp"

namespace quasiquad {

namespace {

constexpr double kProximity = 0.7;
constexpr double kQualityFloor = 0.1;
constexpr double kAlignWeight = 0.5;

// Closed boundary loops of a conforming mesh, as raw polygons.
std::vector<std::vector<Vec2>> boundary_polygons(const TriMesh& m) {
  std::vector<std::vector<int>> incident(m.points.size());
  for (size_t e = 0; e < m.edges.size(); ++e)
    if (m.edges[e].t1 < 0) {
      incident[m.edges[e].a].push_back(int(e));
      incident[m.edges[e].b].push_back(int(e));
    }
  std::vector<char> used(m.edges.size(), 0);
  std::vector<std::vector<Vec2>> loops;
  for (size_t e0 = 0; e0 < m.edges.size(); ++e0) {
    if (m.edges[e0].t1 >= 0 || used[e0]) continue;
    std::vector<Vec2> loop;
    int e = int(e0);
    int v = m.edges[e0].a;
    while (!used[e]) {
      used[e] = 1;
      loop.push_back(m.points[v]);
      v = m.edges[e].a == v ? m.edges[e].b : m.edges[e].a;
      if (incident[v].size() != 2) throw std::runtime_error("boundary is not a closed loop");
      e = incident[v][0] == e ? incident[v][1] : incident[v][0];
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

// Uniform hash grid answering "is any stored point within r of p".
class PointGrid {
 public:
  PointGrid(const BBox& box, double cell) : origin_(box.lo), cell_(cell) {}

  void add(const Vec2& p) { cells_[key_of(p)].push_back(p); }

  bool any_within(const Vec2& p, double r) const {
    int x0 = int(std::floor((p.x() - r - origin_.x()) / cell_));
    int x1 = int(std::floor((p.x() + r - origin_.x()) / cell_));
    int y0 = int(std::floor((p.y() - r - origin_.y()) / cell_));
    int y1 = int(std::floor((p.y() + r - origin_.y()) / cell_));
    for (int ix = x0; ix <= x1; ++ix)
      for (int iy = y0; iy <= y1; ++iy) {
        auto it = cells_.find(key(ix, iy));
        if (it == cells_.end()) continue;
        for (const Vec2& q : it->second)
          if ((q - p).norm() < r) return true;
      }
    return false;
  }

 private:
  Vec2 origin_;
  double cell_;
  std::unordered_map<long long, std::vector<Vec2>> cells_;

  static long long key(int ix, int iy) {
    return (static_cast<long long>(ix) << 32) ^ static_cast<unsigned int>(iy);
  }
  long long key_of(const Vec2& p) const {
    return key(int(std::floor((p.x() - origin_.x()) / cell_)),
               int(std::floor((p.y() - origin_.y()) / cell_)));
  }
};

double checked_size(const SizeEval& s, const Vec2& p) {
  double v = s(p);
  if (!(v > 0.0)) throw std::runtime_error("size field must be positive");
  return v;
}

}  // namespace

double cross_angle_at(const CrossField& f, const TriLocator& loc, const Vec2& p) {
  std::array<double, 3> bary;
  int t = loc.locate(p, bary);
  const TriMesh& m = *f.mesh;
  Vec2 u = Vec2::Zero();
  for (int k = 0; k < 3; ++k) u += f.u[m.tri_edges[t][k]] * (1.0 - 2.0 * bary[(k + 2) % 3]);
  if (u.norm() < 1e-12) return 0.0;
  return std::atan2(u.y(), u.x()) / 4.0;
}

TriMesh frontal_insert(const TriMesh& work, const CrossField& field, const SizeEval& s,
                       int face_id) {
  auto loops = boundary_polygons(work);
  BBox box;
  for (const Vec2& p : work.points) box.expand(p);

  DelaunayKernel kernel(box);
  for (const Vec2& p : work.points) {
    auto r = kernel.insert(p);
    if (!r.inserted) throw std::runtime_error("mesh reconstruction failed");
  }
  const int base = 4;  // kernel ids of the input vertices start past the supers
  for (const auto& e : work.edges)
    if (e.t1 < 0) kernel.constrain(e.a + base, e.b + base);

  double smin = std::numeric_limits<double>::max();
  for (const Vec2& p : work.points) smin = std::min(smin, checked_size(s, p));
  PointGrid grid(box, std::max(kProximity * smin, 1e-6 * box.diag()));
  for (const Vec2& p : work.points) grid.add(p);

  std::vector<char> on_bdr(work.points.size(), 0);
  for (const auto& e : work.edges)
    if (e.t1 < 0) on_bdr[e.a] = on_bdr[e.b] = 1;
  std::deque<int> queue;
  for (size_t v = 0; v < work.points.size(); ++v)
    if (on_bdr[v]) queue.push_back(int(v) + base);

  TriLocator floc(*field.mesh);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    Vec2 x = kernel.point(v);
    double theta = cross_angle_at(field, floc, x);
    double step = checked_size(s, x);
    for (int k = 0; k < 4; ++k) {
      double a = theta + k * (M_PI / 2);
      Vec2 cand = x + step * Vec2(std::cos(a), std::sin(a));
      if (!point_in_loops(cand, loops)) continue;
      if (grid.any_within(cand, kProximity * checked_size(s, cand))) continue;
      auto res = kernel.insert(cand);
      if (!res.inserted) continue;  // duplicate or degenerate placement
      grid.add(cand);
      queue.push_back(res.vertex);
      if (kernel.vertex_count() > 2000000) throw std::runtime_error("frontal insertion diverged");
    }
  }

  // keep the triangles covering the face; compact with boundary vertices
  // first, inserted ones after in insertion order
  std::vector<std::array<int, 3>> kept;
  std::vector<char> used(kernel.vertex_count(), 0);
  for (const auto& t : kernel.triangles(false)) {
    Vec2 c = (kernel.point(t[0]) + kernel.point(t[1]) + kernel.point(t[2])) / 3.0;
    if (!point_in_loops(c, loops)) continue;
    kept.push_back(t);
    for (int v : t) used[v] = 1;
  }
  if (kept.empty()) throw std::runtime_error("face triangulation is empty");
  TriMesh out;
  std::vector<int> remap(kernel.vertex_count(), -1);
  for (int v = base; v < kernel.vertex_count(); ++v) {
    if (!used[v]) continue;
    remap[v] = int(out.points.size());
    out.points.push_back(kernel.point(v));
    if (v - base < int(work.points.size()))
      out.labels.push_back(work.labels[v - base]);
    else
      out.labels.push_back({VertexClass::Interior, face_id});
  }
  for (const auto& t : kept) out.tris.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  out.build_edges();
  check_conforming(out);
  return out;
}

MixedMesh combine_quads(const TriMesh& mesh, const CrossField& field) {
  TriLocator floc(*field.mesh);

  struct Candidate {
    double score = 0.0;
    double sicn = 0.0;
    int edge = -1;
    int t0 = -1, t1 = -1;
    std::array<int, 4> quad{};
  };
  std::vector<Candidate> cands;

  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& ed = mesh.edges[e];
    if (ed.t1 < 0) continue;
    // orient so t_left holds the directed edge a->b
    int a = ed.a, b = ed.b;
    int t_left = ed.t0, t_right = ed.t1;
    bool left_has_ab = false;
    for (int k = 0; k < 3; ++k)
      if (mesh.tris[t_left][k] == a && mesh.tris[t_left][(k + 1) % 3] == b) left_has_ab = true;
    if (!left_has_ab) std::swap(t_left, t_right);
    int c_left = mesh.opposite_vertex(int(e), t_left);
    int c_right = mesh.opposite_vertex(int(e), t_right);
    Candidate c;
    c.edge = int(e);
    c.t0 = t_left;
    c.t1 = t_right;
    c.quad = {a, c_right, b, c_left};
    std::array<Vec2, 4> q;
    for (int k = 0; k < 4; ++k) q[k] = mesh.points[c.quad[k]];
    c.sicn = sicn_quality(q);
    double mis = 0.0;
    for (int k = 0; k < 4; ++k) {
      Vec2 d = q[(k + 1) % 4] - q[k];
      double phi = std::atan2(d.y(), d.x());
      double theta = cross_angle_at(field, floc, 0.5 * (q[k] + q[(k + 1) % 4]));
      mis += std::abs(std::remainder(phi - theta, M_PI / 2)) / (M_PI / 4);
    }
    mis /= 4.0;
    c.score = c.sicn * (1.0 - kAlignWeight * mis);
    cands.push_back(c);
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.edge < b.edge;
  });

  MixedMesh out;
  out.points = mesh.points;
  out.labels = mesh.labels;
  std::vector<char> used(mesh.tris.size(), 0);
  for (const auto& c : cands) {
    if (used[c.t0] || used[c.t1]) continue;
    if (!(c.sicn > kQualityFloor)) continue;
    used[c.t0] = used[c.t1] = 1;
    out.quads.push_back(c.quad);
  }
  for (size_t t = 0; t < mesh.tris.size(); ++t)
    if (!used[t]) out.tris.push_back(mesh.tris[t]);
  return out;
}

namespace {

// Curve owning a boundary edge, judged from the endpoint labels; several
// matches resolve to the nearest projection of the edge midpoint.
struct CurveProjection {
  bool found = false;
  int curve = -1;
  Vec2 point;
};

CurveProjection project_to_curve(const VertexLabel& la, const VertexLabel& lb,
                                 const PlanarModel& m, const Vec2& mid) {
  std::vector<int> candidates;
  auto add_unique = [&](int c) {
    if (c >= 0 && c < int(m.curves.size()) &&
        std::find(candidates.begin(), candidates.end(), c) == candidates.end())
      candidates.push_back(c);
  };
  if (la.cls == VertexClass::Interior || lb.cls == VertexClass::Interior) return {};
  if (la.cls == VertexClass::OnCurve) add_unique(la.id);
  if (lb.cls == VertexClass::OnCurve) add_unique(lb.id);
  if (la.cls == VertexClass::Corner && lb.cls == VertexClass::Corner) {
    for (int c = 0; c < int(m.curves.size()); ++c) {
      const auto& cur = m.curves[c];
      if ((cur.c0 == la.id && cur.c1 == lb.id) || (cur.c0 == lb.id && cur.c1 == la.id))
        candidates.push_back(c);
    }
  }
  CurveProjection best;
  double best_d = std::numeric_limits<double>::max();
  for (int c : candidates) {
    auto pr = polyline_project(m.curves[c].pts, mid);
    if (pr.distance < best_d) {
      best_d = pr.distance;
      best = {true, c, pr.point};
    }
  }
  return best;
}

}  // namespace

QuadMesh midpoint_subdivide(const MixedMesh& mixed, const PlanarModel& m) {
  const int nv = int(mixed.points.size());

  // deterministic edge ids in element walk order
  std::map<std::pair<int, int>, int> edge_id;
  std::vector<std::pair<int, int>> edge_verts;
  std::vector<int> edge_use;
  auto touch = [&](int u, int v) {
    auto key = std::minmax(u, v);
    auto it = edge_id.find(key);
    if (it == edge_id.end()) {
      it = edge_id.emplace(key, int(edge_verts.size())).first;
      edge_verts.push_back(key);
      edge_use.push_back(0);
    }
    ++edge_use[it->second];
    return it->second;
  };
  for (const auto& q : mixed.quads)
    for (int k = 0; k < 4; ++k) touch(q[k], q[(k + 1) % 4]);
  for (const auto& t : mixed.tris)
    for (int k = 0; k < 3; ++k) touch(t[k], t[(k + 1) % 3]);
  const int ne = int(edge_verts.size());

  int face_guess = -1;
  for (const auto& l : mixed.labels)
    if (l.cls == VertexClass::Interior && l.id >= 0) {
      face_guess = l.id;
      break;
    }

  QuadMesh out;
  out.points = mixed.points;
  out.labels = mixed.labels;
  out.points.resize(nv + ne + mixed.quads.size() + mixed.tris.size());
  out.labels.resize(out.points.size(), {VertexClass::Interior, face_guess});

  std::vector<Vec2> plain_mid(ne);
  std::vector<char> projected(ne, 0);
  for (int e = 0; e < ne; ++e) {
    auto [u, v] = edge_verts[e];
    plain_mid[e] = 0.5 * (mixed.points[u] + mixed.points[v]);
    out.points[nv + e] = plain_mid[e];
    if (edge_use[e] == 1) {
      auto pr = project_to_curve(mixed.labels[u], mixed.labels[v], m, plain_mid[e]);
      if (pr.found) {
        out.points[nv + e] = pr.point;
        out.labels[nv + e] = {VertexClass::OnCurve, pr.curve};
        projected[e] = 1;
      }
    }
  }

  auto mid_of = [&](int u, int v) { return nv + edge_id.at(std::minmax(u, v)); };
  for (size_t q = 0; q < mixed.quads.size(); ++q) {
    const auto& qq = mixed.quads[q];
    int c = nv + ne + int(q);
    out.points[c] =
        0.25 * (mixed.points[qq[0]] + mixed.points[qq[1]] + mixed.points[qq[2]] + mixed.points[qq[3]]);
    for (int k = 0; k < 4; ++k)
      out.quads.push_back({qq[k], mid_of(qq[k], qq[(k + 1) % 4]), c, mid_of(qq[(k + 3) % 4], qq[k])});
  }
  for (size_t t = 0; t < mixed.tris.size(); ++t) {
    const auto& tt = mixed.tris[t];
    int c = nv + ne + int(mixed.quads.size()) + int(t);
    out.points[c] = (mixed.points[tt[0]] + mixed.points[tt[1]] + mixed.points[tt[2]]) / 3.0;
    for (int k = 0; k < 3; ++k)
      out.quads.push_back({tt[k], mid_of(tt[k], tt[(k + 1) % 3]), c, mid_of(tt[(k + 2) % 3], tt[k])});
  }

  // undo projections that invert an adjacent quad, until stable
  std::vector<std::vector<int>> v2q(out.points.size());
  for (size_t q = 0; q < out.quads.size(); ++q)
    for (int v : out.quads[q]) v2q[v].push_back(int(q));
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < ne; ++e) {
      if (!projected[e]) continue;
      bool bad = false;
      for (int q : v2q[nv + e])
        if (quad_sicn(out, q) <= 0.0) bad = true;
      if (bad) {
        out.points[nv + e] = plain_mid[e];
        projected[e] = 0;
        changed = true;
      }
    }
  }

  out.build_connectivity();
  require_census(out, "midpoint_subdivide");
  return out;
}

}  // namespace quasiquad
