#include "quasiquad/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace quasiquad {

std::vector<CurveChain> sample_curves(const PlanarModel& m, double size) {
  if (size <= 0.0) throw std::runtime_error("curve sample size must be positive");
  constexpr double kCap = 30.0 * M_PI / 180.0;
  std::vector<CurveChain> chains(m.curves.size());
  for (size_t c = 0; c < m.curves.size(); ++c) {
    const auto& pl = m.curves[c].pts;
    double h = size;
    if (auto it = m.curve_size_hint.find(static_cast<int>(c)); it != m.curve_size_hint.end())
      h = it->second;
    double L = polyline_length(pl);
    if (L <= 0.0) throw std::runtime_error("zero-length curve");
    auto cum = polyline_cumlen(pl);

    // turning angle at each interior polyline vertex
    std::vector<double> turn(pl.size(), 0.0);
    for (size_t i = 1; i + 1 < pl.size(); ++i)
      turn[i] = std::abs(angle_between(pl[i] - pl[i - 1], pl[i + 1] - pl[i]));

    int n = std::max(1, static_cast<int>(std::ceil(L / h - 1e-9)));
    std::vector<double> s(n + 1);
    for (int i = 0; i <= n; ++i) s[i] = L * i / n;

    // split chords spanning more than the turning cap, at original vertices,
    // until every chord spans at most the cap or polyline resolution is hit
    for (int pass = 0; pass < 64; ++pass) {
      std::vector<double> inserts;
      for (size_t i = 0; i + 1 < s.size(); ++i) {
        double spanned = 0.0;
        double best_split = -1.0, best_dist = std::numeric_limits<double>::max();
        double mid = 0.5 * (s[i] + s[i + 1]);
        for (size_t j = 1; j + 1 < pl.size(); ++j) {
          if (cum[j] <= s[i] + 1e-12 * L || cum[j] >= s[i + 1] - 1e-12 * L) continue;
          spanned += turn[j];
          double d = std::abs(cum[j] - mid);
          if (d < best_dist) {
            best_dist = d;
            best_split = cum[j];
          }
        }
        if (spanned > kCap + 1e-9 && best_split > 0.0) inserts.push_back(best_split);
      }
      if (inserts.empty()) break;
      s.insert(s.end(), inserts.begin(), inserts.end());
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    CurveChain chain;
    for (size_t i = 0; i < s.size(); ++i) chain.pts.push_back(polyline_point_at(pl, cum, s[i]));
    chain.pts.front() = pl.front();
    chain.pts.back() = pl.back();
    chains[c] = std::move(chain);
  }
  return chains;
}

DelaunayKernel::DelaunayKernel(const BBox& data_box) {
  double d = std::max(data_box.diag(), 1e-12);
  dup_tol_ = 1e-9 * d;
  Vec2 c = 0.5 * (data_box.lo + data_box.hi);
  double r = 5.0 * d;
  points_ = {c + Vec2(-r, -r), c + Vec2(r, -r), c + Vec2(r, r), c + Vec2(-r, r)};
  tris_.resize(2);
  tris_[0].v = {0, 1, 2};
  tris_[0].adj = {-1, -1, 1};
  tris_[0].alive = true;
  tris_[1].v = {0, 2, 3};
  tris_[1].adj = {0, -1, -1};
  tris_[1].alive = true;
  v2t_.assign(4, 0);
  v2t_[3] = 1;
}

int DelaunayKernel::new_tri() {
  if (!free_tris_.empty()) {
    int t = free_tris_.back();
    free_tris_.pop_back();
    tris_[t] = Tri{};
    tris_[t].alive = true;
    return t;
  }
  tris_.push_back(Tri{});
  tris_.back().alive = true;
  return static_cast<int>(tris_.size()) - 1;
}

int DelaunayKernel::edge_index(int t, int a, int b) const {
  for (int k = 0; k < 3; ++k)
    if (tris_[t].v[k] == a && tris_[t].v[(k + 1) % 3] == b) return k;
  return -1;
}

int DelaunayKernel::locate(const Vec2& p) const {
  int t = last_tri_;
  if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive)
    for (t = 0; t < static_cast<int>(tris_.size()) && !tris_[t].alive; ++t) {}
  int prev = -1;
  size_t cap = 4 * tris_.size() + 16;
  for (size_t step = 0; step < cap; ++step) {
    int go = -2;  // -2: containing
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = points_[tris_[t].v[k]];
      const Vec2& b = points_[tris_[t].v[(k + 1) % 3]];
      if (orient2d(a, b, p) < 0.0) {
        int nt = tris_[t].adj[k];
        if (nt < 0) return -1;  // beyond the bounding hull
        if (nt != prev || go == -2) go = nt;
        if (nt != prev) break;
      }
    }
    if (go == -2) return t;
    prev = t;
    t = go;
  }
  for (size_t t2 = 0; t2 < tris_.size(); ++t2) {
    if (!tris_[t2].alive) continue;
    bool in = true;
    for (int k = 0; k < 3 && in; ++k)
      in = orient2d(points_[tris_[t2].v[k]], points_[tris_[t2].v[(k + 1) % 3]], p) >= 0.0;
    if (in) return static_cast<int>(t2);
  }
  return -1;
}

DelaunayKernel::InsertResult DelaunayKernel::insert(const Vec2& p) {
  last_created_.clear();
  int t0 = locate(p);
  if (t0 < 0) return {};
  for (int v : tris_[t0].v)
    if ((points_[v] - p).norm() <= dup_tol_) return {v, false};

  // cavity = connected incircle-violating triangles, never across constraints
  std::vector<int> cavity;
  std::vector<int> stack{t0};
  std::map<int, bool> seen{{t0, true}};
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    cavity.push_back(t);
    for (int k = 0; k < 3; ++k) {
      int nt = tris_[t].adj[k];
      if (nt < 0 || seen.count(nt)) continue;
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      if (is_constrained(a, b)) continue;
      const auto& T = tris_[nt].v;
      if (incircle(points_[T[0]], points_[T[1]], points_[T[2]], p) > 0.0) {
        seen[nt] = true;
        stack.push_back(nt);
      }
    }
  }

  // boundary facets, CCW as seen from p
  struct Facet {
    int a, b, outside;
  };
  std::vector<Facet> facets;
  for (int t : cavity) {
    for (int k = 0; k < 3; ++k) {
      int nt = tris_[t].adj[k];
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      bool internal = nt >= 0 && seen.count(nt) && !is_constrained(a, b);
      if (!internal) facets.push_back({a, b, nt});
    }
  }
  for (const auto& f : facets)
    if (orient2d(points_[f.a], points_[f.b], p) <= 0.0) return {};  // degenerate placement

  int np = static_cast<int>(points_.size());
  points_.push_back(p);
  v2t_.push_back(-1);
  for (int t : cavity) {
    tris_[t].alive = false;
    free_tris_.push_back(t);
  }
  std::map<int, int> start_tri, end_tri;
  for (const auto& f : facets) {
    int t = new_tri();
    tris_[t].v = {f.a, f.b, np};
    start_tri[f.a] = t;
    end_tri[f.b] = t;
    last_created_.push_back(t);
  }
  for (size_t i = 0; i < facets.size(); ++i) {
    int t = last_created_[i];
    const auto& f = facets[i];
    tris_[t].adj[0] = f.outside;
    if (f.outside >= 0) {
      int j = edge_index(f.outside, f.b, f.a);
      if (j < 0) throw std::runtime_error("cavity boundary stitch failed");
      tris_[f.outside].adj[j] = t;
    }
    tris_[t].adj[1] = start_tri.at(f.b);
    tris_[t].adj[2] = end_tri.at(f.a);
    for (int v : tris_[t].v) v2t_[v] = t;
  }
  last_tri_ = last_created_.empty() ? last_tri_ : last_created_.front();
  return {np, true};
}

std::vector<int> DelaunayKernel::vertex_fan(int a) const {
  std::vector<int> fan;
  int t0 = v2t_[a];
  if (t0 < 0 || !tris_[t0].alive) {
    for (size_t t = 0; t < tris_.size(); ++t)
      if (tris_[t].alive &&
          (tris_[t].v[0] == a || tris_[t].v[1] == a || tris_[t].v[2] == a)) {
        t0 = static_cast<int>(t);
        break;
      }
  }
  if (t0 < 0) return fan;
  std::vector<int> stack{t0};
  std::map<int, bool> seen{{t0, true}};
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    fan.push_back(t);
    for (int k = 0; k < 3; ++k) {
      int va = tris_[t].v[k], vb = tris_[t].v[(k + 1) % 3];
      if (va != a && vb != a) continue;
      int nt = tris_[t].adj[k];
      if (nt >= 0 && !seen.count(nt)) {
        seen[nt] = true;
        stack.push_back(nt);
      }
    }
  }
  return fan;
}

int DelaunayKernel::find_tri_with_edge(int a, int b) const {
  for (int t : vertex_fan(a))
    if (edge_index(t, a, b) >= 0) return t;
  return -1;
}

bool DelaunayKernel::has_edge(int a, int b) const {
  for (int t : vertex_fan(a)) {
    if (edge_index(t, a, b) >= 0 || edge_index(t, b, a) >= 0) return true;
  }
  return false;
}

void DelaunayKernel::flip(int t, int k) {
  int nt = tris_[t].adj[k];
  int A = tris_[t].v[k], B = tris_[t].v[(k + 1) % 3], C = tris_[t].v[(k + 2) % 3];
  int j = edge_index(nt, B, A);
  int D = tris_[nt].v[(j + 2) % 3];
  int tCA = tris_[t].adj[(k + 2) % 3];
  int tBC = tris_[t].adj[(k + 1) % 3];
  int nAD = tris_[nt].adj[(j + 1) % 3];
  int nDB = tris_[nt].adj[(j + 2) % 3];
  tris_[t].v = {C, A, D};
  tris_[nt].v = {D, B, C};
  tris_[t].adj = {tCA, nAD, nt};
  tris_[nt].adj = {nDB, tBC, t};
  auto restitch = [&](int x, int va, int vb, int owner) {
    if (x < 0) return;
    int e = edge_index(x, va, vb);
    if (e < 0) throw std::runtime_error("flip stitch failed");
    tris_[x].adj[e] = owner;
  };
  restitch(tCA, A, C, t);
  restitch(nAD, D, A, t);
  restitch(nDB, B, D, nt);
  restitch(tBC, C, B, nt);
  v2t_[A] = t;
  v2t_[C] = t;
  v2t_[B] = nt;
  v2t_[D] = nt;
}

void DelaunayKernel::constrain(int a, int b) {
  auto key = std::minmax(a, b);
  if (constrained_.count(key)) return;
  if (a == b) throw std::runtime_error("constraint endpoints coincide");
  for (int guard = 0; guard < 10000 && !has_edge(a, b); ++guard) {
    // first crossed edge: wedge of a containing direction a->b
    int u = -1, v = -1;
    for (int t : vertex_fan(a)) {
      int i = 0;
      while (tris_[t].v[i] != a) ++i;
      int cu = tris_[t].v[(i + 1) % 3], cv = tris_[t].v[(i + 2) % 3];
      double ou = orient2d(points_[a], points_[cu], points_[b]);
      double ov = orient2d(points_[a], points_[cv], points_[b]);
      if (ou == 0.0 || ov == 0.0)
        throw std::runtime_error("vertex lies on a constrained segment");
      if (ou > 0.0 && ov < 0.0) {
        u = cu;
        v = cv;
        break;
      }
    }
    if (u < 0) throw std::runtime_error("constraint recovery failed to start");

    // march along segment a->b collecting crossed edges (u left, v right)
    std::deque<std::pair<int, int>> crossing;
    int cu = u, cv = v;
    for (int steps = 0; steps < 10000; ++steps) {
      if (is_constrained(cu, cv)) throw std::runtime_error("boundary curves intersect");
      crossing.emplace_back(cu, cv);
      int t = find_tri_with_edge(cv, cu);  // triangle on the far side
      if (t < 0) throw std::runtime_error("constraint march lost adjacency");
      int e = edge_index(t, cv, cu);
      int w = tris_[t].v[(e + 2) % 3];
      if (w == b) break;
      double ow = orient2d(points_[a], points_[b], points_[w]);
      if (ow == 0.0) throw std::runtime_error("vertex lies on a constrained segment");
      // ou > 0 put cu on the right of a->b, so a left-side w replaces cv
      if (ow > 0.0)
        cv = w;
      else
        cu = w;
    }

    // flip crossed edges until none crosses the segment
    int flip_guard = 0;
    while (!crossing.empty()) {
      if (++flip_guard > 100000) throw std::runtime_error("constraint flip loop stuck");
      auto [x, y] = crossing.front();
      crossing.pop_front();
      int t = find_tri_with_edge(x, y);
      if (t < 0) continue;  // already flipped away
      int k = edge_index(t, x, y);
      int nt = tris_[t].adj[k];
      if (nt < 0) continue;
      int P = tris_[t].v[(k + 2) % 3];
      int j = edge_index(nt, y, x);
      int Q = tris_[nt].v[(j + 2) % 3];
      double o1 = orient2d(points_[P], points_[Q], points_[x]);
      double o2 = orient2d(points_[P], points_[Q], points_[y]);
      if (!((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))) {
        crossing.emplace_back(x, y);  // not flippable yet
        continue;
      }
      flip(t, k);
      double op = orient2d(points_[a], points_[b], points_[P]);
      double oq = orient2d(points_[a], points_[b], points_[Q]);
      if (P != a && P != b && Q != a && Q != b && ((op > 0.0 && oq < 0.0) || (op < 0.0 && oq > 0.0)))
        crossing.emplace_back(P, Q);
    }
  }
  if (!has_edge(a, b)) throw std::runtime_error("constraint recovery failed");
  constrained_.insert(key);
}

std::vector<std::array<int, 3>> DelaunayKernel::triangles(bool include_super) const {
  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris_) {
    if (!t.alive) continue;
    if (!include_super && (t.v[0] < 4 || t.v[1] < 4 || t.v[2] < 4)) continue;
    out.push_back(t.v);
  }
  return out;
}

bool DelaunayKernel::locally_delaunay() const {
  for (size_t t = 0; t < tris_.size(); ++t) {
    if (!tris_[t].alive) continue;
    for (int k = 0; k < 3; ++k) {
      int nt = tris_[t].adj[k];
      if (nt < static_cast<int>(t)) continue;
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      if (is_constrained(a, b)) continue;
      int j = edge_index(nt, b, a);
      int d = tris_[nt].v[(j + 2) % 3];
      const auto& T = tris_[t].v;
      if (incircle(points_[T[0]], points_[T[1]], points_[T[2]], points_[d]) > 0.0) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::vector<Vec2>> chain_loop_polygons(const std::vector<CurveChain>& chains,
                                                   const std::vector<FaceLoop>& loops) {
  std::vector<std::vector<Vec2>> polys;
  for (const auto& loop : loops) {
    std::vector<Vec2> poly;
    for (const auto& r : loop) {
      std::vector<Vec2> pts = chains[r.curve].pts;
      if (!r.forward) std::reverse(pts.begin(), pts.end());
      poly.insert(poly.end(), pts.begin(), pts.end() - 1);
    }
    polys.push_back(std::move(poly));
  }
  return polys;
}

}  // namespace

TriMesh triangulate_face(const PlanarModel& m, int face, const std::vector<CurveChain>& chains,
                         const std::function<double(const Vec2&)>& size) {
  auto loops = face_loops(m, face);
  auto polys = chain_loop_polygons(chains, loops);
  BBox box;
  for (const auto& poly : polys)
    for (const auto& p : poly) box.expand(p);

  DelaunayKernel kernel(box);
  std::vector<VertexLabel> labels(4, {VertexClass::Interior, -1});

  auto insert_labeled = [&](const Vec2& p, VertexLabel lab) {
    auto r = kernel.insert(p);
    if (r.vertex < 0) throw std::runtime_error("boundary point insertion failed");
    if (r.inserted) {
      labels.push_back(lab);
    } else if (lab.cls == VertexClass::Corner && labels[r.vertex].cls != VertexClass::Corner) {
      labels[r.vertex] = lab;
    }
    return r.vertex;
  };

  // chain vertices + constraints
  std::map<int, std::vector<int>> curve_ids;
  for (const auto& loop : loops) {
    for (const auto& r : loop) {
      if (curve_ids.count(r.curve)) continue;
      const auto& c = m.curves[r.curve];
      const auto& pts = chains[r.curve].pts;
      std::vector<int> ids(pts.size());
      for (size_t i = 0; i < pts.size(); ++i) {
        VertexLabel lab;
        if (i == 0)
          lab = {VertexClass::Corner, c.c0};
        else if (i + 1 == pts.size())
          lab = {VertexClass::Corner, c.c1};
        else
          lab = {VertexClass::OnCurve, r.curve};
        ids[i] = insert_labeled(pts[i], lab);
      }
      curve_ids[r.curve] = std::move(ids);
    }
  }
  for (const auto& [c, ids] : curve_ids)
    for (size_t i = 0; i + 1 < ids.size(); ++i)
      if (ids[i] != ids[i + 1]) kernel.constrain(ids[i], ids[i + 1]);

  // interior flags by centroid parity against the chain polygons
  const auto& tris = kernel.tris();
  std::vector<std::uint8_t> interior(tris.size(), 0);
  std::vector<int> queue;
  for (size_t t = 0; t < tris.size(); ++t) {
    if (!tris[t].alive) continue;
    if (tris[t].v[0] < 4 || tris[t].v[1] < 4 || tris[t].v[2] < 4) continue;
    Vec2 c = (kernel.point(tris[t].v[0]) + kernel.point(tris[t].v[1]) + kernel.point(tris[t].v[2])) / 3.0;
    if (point_in_loops(c, polys)) {
      interior[t] = 1;
      queue.push_back(static_cast<int>(t));
    }
  }

  // refine: split the longest non-constrained edge above 1.4 * s(midpoint)
  size_t head = 0;
  while (head < queue.size()) {
    int t = queue[head++];
    if (kernel.vertex_count() > 500000) throw std::runtime_error("refinement diverged");
    if (t >= static_cast<int>(kernel.tris().size())) continue;
    const auto& T = kernel.tris()[t];
    if (!T.alive || !interior[t]) continue;
    int best_k = -1;
    double best_len = 0.0;
    for (int k = 0; k < 3; ++k) {
      int a = T.v[k], b = T.v[(k + 1) % 3];
      if (kernel.is_constrained(a, b)) continue;
      double len = (kernel.point(a) - kernel.point(b)).norm();
      if (len > best_len) {
        best_len = len;
        best_k = k;
      }
    }
    if (best_k < 0) continue;
    Vec2 mid = 0.5 * (kernel.point(T.v[best_k]) + kernel.point(T.v[(best_k + 1) % 3]));
    double s = size(mid);
    if (!(s > 0.0)) throw std::runtime_error("size field must be positive");
    if (best_len <= 1.4 * s) continue;
    auto r = kernel.insert(mid);
    if (!r.inserted) continue;
    labels.push_back({VertexClass::Interior, face});
    interior.resize(kernel.tris().size(), 0);
    for (int nt : kernel.last_created()) {
      interior[nt] = 1;
      queue.push_back(nt);
    }
  }

  // extract
  TriMesh mesh;
  std::vector<int> remap(kernel.vertex_count(), -1);
  for (size_t t = 0; t < kernel.tris().size(); ++t) {
    if (!kernel.tris()[t].alive || !interior[t]) continue;
    std::array<int, 3> tv;
    for (int k = 0; k < 3; ++k) {
      int v = kernel.tris()[t].v[k];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(mesh.points.size());
        mesh.points.push_back(kernel.point(v));
        mesh.labels.push_back(labels[v]);
      }
      tv[k] = remap[v];
    }
    mesh.tris.push_back(tv);
  }
  if (mesh.tris.empty()) throw std::runtime_error("face triangulation is empty");
  mesh.build_edges();
  check_conforming(mesh);
  return mesh;
}

bool delaunay_insert(TriMesh& mesh, const Vec2& p) {
  if (mesh.edges.empty()) mesh.build_edges();
  TriLocator locator(mesh);
  if (!locator.inside(p)) return false;

  BBox box;
  for (const auto& q : mesh.points) box.expand(q);
  DelaunayKernel kernel(box);
  std::vector<int> remap(mesh.points.size(), -1);
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    auto r = kernel.insert(mesh.points[v]);
    if (r.vertex < 0 || !r.inserted) throw std::runtime_error("mesh reconstruction failed");
    remap[v] = r.vertex;
  }
  for (const auto& e : mesh.edges)
    if (e.t1 < 0) kernel.constrain(remap[e.a], remap[e.b]);

  auto r = kernel.insert(p);
  if (!r.inserted) return false;

  std::vector<VertexLabel> labels(kernel.vertex_count(), {VertexClass::Interior, -1});
  for (size_t v = 0; v < mesh.points.size(); ++v) labels[remap[v]] = mesh.labels[v];
  int face = -1;
  for (const auto& lab : mesh.labels)
    if (lab.cls == VertexClass::Interior && lab.id >= 0) {
      face = lab.id;
      break;
    }
  labels[r.vertex] = {VertexClass::Interior, face};

  TriMesh out;
  std::vector<int> back(kernel.vertex_count(), -1);
  for (const auto& T : kernel.triangles()) {
    Vec2 c = (kernel.point(T[0]) + kernel.point(T[1]) + kernel.point(T[2])) / 3.0;
    if (!locator.inside(c)) continue;
    std::array<int, 3> tv;
    for (int k = 0; k < 3; ++k) {
      int v = T[k];
      if (back[v] < 0) {
        back[v] = static_cast<int>(out.points.size());
        out.points.push_back(kernel.point(v));
        out.labels.push_back(labels[v]);
      }
      tv[k] = back[v];
    }
    out.tris.push_back(tv);
  }
  out.build_edges();
  check_conforming(out);
  mesh = std::move(out);
  return true;
}

}  // namespace quasiquad
