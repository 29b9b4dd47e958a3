#include "quasiquad/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace quasiquad {

namespace {

struct CurveGeom {
  double length = 0.0;
  BBox box;
  std::set<int> corners;
};

// exact distance to the polyline, capped at the best bound so far
double curve_distance(const std::vector<Vec2>& pts, const Vec2& p, double upper) {
  double d = upper;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    d = std::min(d, point_segment_distance(p, pts[i], pts[i + 1]));
  return d;
}

}  // namespace

SizeField feature_size(const PlanarModel& m, const TriMesh& mesh) {
  std::vector<CurveGeom> geo(m.curves.size());
  for (size_t c = 0; c < m.curves.size(); ++c) {
    geo[c].length = polyline_length(m.curves[c].pts);
    geo[c].corners = {m.curves[c].c0, m.curves[c].c1};
    for (const auto& p : m.curves[c].pts) geo[c].box.expand(p);
  }

  auto vertex_curves = [&](const VertexLabel& lab) {
    std::vector<int> out;
    if (lab.cls == VertexClass::OnCurve) {
      out.push_back(lab.id);
    } else if (lab.cls == VertexClass::Corner) {
      for (size_t c = 0; c < m.curves.size(); ++c)
        if (geo[c].corners.count(lab.id)) out.push_back(static_cast<int>(c));
    }
    return out;
  };

  SizeField field;
  field.mesh = &mesh;
  field.values.assign(mesh.points.size(), std::numeric_limits<double>::infinity());
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    auto curves = vertex_curves(mesh.labels[v]);
    if (curves.empty()) continue;
    const Vec2& p = mesh.points[v];
    double s = std::numeric_limits<double>::infinity();
    for (int j : curves) {
      s = std::min(s, geo[j].length);
      for (size_t k = 0; k < m.curves.size(); ++k) {
        if (k == static_cast<size_t>(j)) continue;
        bool shares = false;
        for (int c : geo[j].corners) shares |= geo[k].corners.count(c) != 0;
        if (shares) continue;
        // cheap reject: bbox distance already above current bound
        Vec2 lo = geo[k].box.lo - p, hi = p - geo[k].box.hi;
        double dx = std::max({lo.x(), hi.x(), 0.0});
        double dy = std::max({lo.y(), hi.y(), 0.0});
        if (std::hypot(dx, dy) >= s) continue;
        s = curve_distance(m.curves[k].pts, p, s);
      }
    }
    field.values[v] = s;
  }
  return field;
}

SizeField one_way_smooth(const TriMesh& mesh, const SizeField& field, double g_max) {
  if (!(g_max > 0.0)) throw std::runtime_error("gradation bound must be positive");
  SizeField out = field;
  out.mesh = &mesh;
  std::vector<std::vector<std::pair<int, double>>> nbr(mesh.points.size());
  for (const auto& e : mesh.edges) {
    double d = (mesh.points[e.a] - mesh.points[e.b]).norm();
    nbr[e.a].push_back({e.b, d});
    nbr[e.b].push_back({e.a, d});
  }
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  for (size_t v = 0; v < out.values.size(); ++v)
    if (std::isfinite(out.values[v])) queue.push({out.values[v], static_cast<int>(v)});
  while (!queue.empty()) {
    auto [s, v] = queue.top();
    queue.pop();
    if (s > out.values[v]) continue;  // stale entry
    for (auto [w, d] : nbr[v]) {
      double cand = s + g_max * d;
      if (cand < out.values[w]) {
        out.values[w] = cand;
        queue.push({cand, w});
      }
    }
  }
  return out;
}

std::vector<int> face_quad_budget(const PlanarModel& m, int total_quads) {
  int nf = static_cast<int>(m.faces.size());
  if (total_quads < nf) throw std::runtime_error("quad target below face count");
  std::vector<int> out(nf, 0);
  double free_area = 0.0;
  int remaining = total_quads;
  for (int f = 0; f < nf; ++f) {
    if (auto it = m.face_quad_hint.find(f); it != m.face_quad_hint.end()) {
      out[f] = it->second;
      remaining -= it->second;
    } else {
      free_area += face_area(m, f);
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (m.face_quad_hint.count(f)) continue;
    double share = free_area > 0.0 ? face_area(m, f) / free_area : 0.0;
    out[f] = std::max(1, static_cast<int>(std::lround(share * remaining)));
  }
  return out;
}

SizeField combine_face_fields(const TriMesh& global_mesh,
                              const std::vector<std::vector<int>>& face_to_global,
                              const std::vector<SizeField>& face_fields) {
  if (face_to_global.size() != face_fields.size())
    throw std::runtime_error("one vertex map per face field required");
  SizeField out;
  out.mesh = &global_mesh;
  out.values.assign(global_mesh.points.size(), std::numeric_limits<double>::infinity());
  for (size_t f = 0; f < face_fields.size(); ++f) {
    const auto& map = face_to_global[f];
    const auto& vals = face_fields[f].values;
    if (map.size() != vals.size()) throw std::runtime_error("vertex map size mismatch");
    for (size_t v = 0; v < map.size(); ++v)
      out.values[map[v]] = std::min(out.values[map[v]], vals[v]);
  }
  return out;
}

SizeField blend_global(const TriMesh& mesh, const SizeField& s_cf, const SizeField& s_min,
                       double g_max) {
  if (s_cf.values.size() != mesh.points.size() || s_min.values.size() != mesh.points.size())
    throw std::runtime_error("size fields must live on the blend mesh");
  SizeField out;
  out.mesh = &mesh;
  out.values.resize(mesh.points.size());
  for (size_t v = 0; v < mesh.points.size(); ++v)
    out.values[v] = std::min(s_cf.values[v], s_min.values[v]);
  return one_way_smooth(mesh, out, g_max);
}

}  // namespace quasiquad
