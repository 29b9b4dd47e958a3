#include "quasiquad/smoothing.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace quasiquad {

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Diagonal of the ring quad opposite v.
int quad_diagonal(const QuadMesh& m, int q, int v) {
  const auto& quad = m.quads[q];
  for (int k = 0; k < 4; ++k)
    if (quad[k] == v) return quad[(k + 2) % 4];
  throw std::logic_error("quad_diagonal: vertex not in quad");
}

double mean_incident_edge(const QuadMesh& m, int v, const std::vector<int>& nbr) {
  if (nbr.empty()) return 0.0;
  double acc = 0.0;
  for (int w : nbr) acc += (m.points[w] - m.points[v]).norm();
  return acc / static_cast<double>(nbr.size());
}

}  // namespace

MeshQuality quality_over(const QuadMesh& m, const std::vector<int>& quads) {
  MeshQuality q;
  if (quads.empty()) return q;
  double acc = 0.0;
  q.min_sicn = 1.0;
  for (int id : quads) {
    double s = quad_sicn(m, id);
    q.min_sicn = std::min(q.min_sicn, s);
    acc += s;
  }
  q.avg_sicn = acc / static_cast<double>(quads.size());
  return q;
}

std::vector<int> adjacent_quads(const QuadMesh& m, const std::vector<int>& verts) {
  std::vector<char> mark(m.points.size(), 0);
  for (int v : verts) mark[v] = 1;
  std::vector<int> out;
  for (int q = 0; q < static_cast<int>(m.quads.size()); ++q)
    for (int v : m.quads[q])
      if (mark[v]) {
        out.push_back(q);
        break;
      }
  return out;
}

std::vector<Vec2> laplacian_solve(const QuadMesh& m, const std::vector<int>& free_verts) {
  int n = static_cast<int>(free_verts.size());
  std::vector<int> row(m.points.size(), -1);
  for (int r = 0; r < n; ++r) row[free_verts[r]] = r;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  for (int r = 0; r < n; ++r) {
    auto nbr = m.vertex_neighbors(free_verts[r]);
    if (nbr.empty()) throw std::runtime_error("laplacian solve: singular system (isolated vertex)");
    trip.emplace_back(r, r, static_cast<double>(nbr.size()));
    for (int w : nbr) {
      if (row[w] >= 0)
        trip.emplace_back(r, row[w], -1.0);
      else
        rhs.row(r) += m.points[w].transpose();
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("laplacian solve: singular system");
  Eigen::MatrixXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("laplacian solve: singular system");

  std::vector<Vec2> out(n);
  for (int r = 0; r < n; ++r) out[r] = Vec2(x(r, 0), x(r, 1));
  return out;
}

Vec2 winslow_kernel(const Vec2& x, const std::array<Vec2, 8>& ring) {
  Vec2 du = ring[0] - ring[4];
  Vec2 dv = ring[2] - ring[6];
  double a0 = dv.dot(dv);
  double a1 = du.dot(du);
  double scale2 = 0.0;
  for (const auto& p : ring) scale2 = std::max(scale2, (p - x).squaredNorm());
  if (a0 + a1 <= 1e-20 * scale2 || a0 + a1 == 0.0) return x;
  double beta = du.dot(dv);
  Vec2 num = a0 * (ring[0] + ring[4]) + a1 * (ring[2] + ring[6]) -
             0.5 * beta * (ring[1] + ring[5] - ring[3] - ring[7]);
  return num / (2.0 * (a0 + a1));
}

Vec2 angle_kernel(const Vec2& x, const std::vector<Vec2>& ring, bool closed) {
  int n = static_cast<int>(ring.size());
  if (n < 3) return x;
  Vec2 acc(0, 0);
  int cnt = 0;
  int first = closed ? 0 : 1;
  int last = closed ? n : n - 1;
  for (int j = first; j < last; ++j) {
    const Vec2& v = ring[j];
    Vec2 d1 = ring[(j + n - 1) % n] - v;
    Vec2 d2 = ring[(j + 1) % n] - v;
    double l1 = d1.norm(), l2 = d2.norm();
    if (l1 == 0.0 || l2 == 0.0) continue;
    Vec2 u = d1 / l1 + d2 / l2;
    double lu = u.norm();
    // straight wedge: the bisector degenerates, use the wedge normal
    u = lu < 1e-12 ? Vec2(rot90(d1 / l1)) : Vec2(u / lu);
    acc += v + u * u.dot(x - v);
    ++cnt;
  }
  return cnt > 0 ? Vec2(acc / static_cast<double>(cnt)) : x;
}

bool QualityGate::accepts(const MeshQuality& before, const MeshQuality& after) const {
  if (after.min_sicn >= before.min_sicn) return true;
  return allow_tradeoff && after.min_sicn >= floor &&
         after.avg_sicn >= (1.0 - mean_drop) * before.avg_sicn;
}

SmoothResult smooth_loop(QuadMesh& m, const std::vector<int>& free_verts,
                         const PlanarModel* model, const SmoothOptions& opt) {
  SmoothResult res;
  auto cavity = adjacent_quads(m, free_verts);
  res.before = quality_over(m, cavity);
  std::vector<Vec2> saved = m.points;
  auto t0 = std::chrono::steady_clock::now();

  while (res.iterations < opt.max_iter) {
    ++res.iterations;
    double worst = 0.0;
    for (int v : free_verts) {
      const VertexLabel& lab = m.labels[v];
      if (lab.cls == VertexClass::Corner) continue;
      if (lab.cls == VertexClass::OnCurve && model == nullptr) continue;
      auto ring = m.vertex_quad_ring(v);
      auto nbr = m.vertex_neighbors(v);
      if (ring.empty() || nbr.empty()) continue;

      Vec2 x = m.points[v];
      Vec2 nx;
      bool boundary = m.boundary_vertex(v);
      if (!boundary && lab.cls == VertexClass::Interior && ring.size() == 4) {
        std::array<Vec2, 8> st;
        for (int i = 0; i < 4; ++i) {
          st[2 * i] = m.points[nbr[i]];
          st[2 * i + 1] = m.points[quad_diagonal(m, ring[i], v)];
        }
        nx = winslow_kernel(x, st);
      } else {
        std::vector<Vec2> link;
        link.reserve(2 * ring.size() + 1);
        for (size_t i = 0; i < ring.size(); ++i) {
          link.push_back(m.points[nbr[i]]);
          link.push_back(m.points[quad_diagonal(m, ring[i], v)]);
        }
        if (boundary) link.push_back(m.points[nbr.back()]);
        nx = angle_kernel(x, link, !boundary);
      }
      if (lab.cls == VertexClass::OnCurve)
        nx = polyline_project(model->curves[lab.id].pts, nx).point;

      double local = mean_incident_edge(m, v, nbr);
      m.points[v] = nx;
      if (local > 0.0) worst = std::max(worst, (nx - x).norm() / local);
    }
    if (worst < 1e-3) break;
    if (ms_since(t0) > opt.time_budget_ms) break;
  }

  res.after = quality_over(m, cavity);
  if (opt.gate.accepts(res.before, res.after)) {
    res.accepted = true;
  } else {
    m.points = saved;
    res.after = res.before;
  }
  return res;
}

UntangleResult untangle_local(QuadMesh& m, const std::vector<int>& cavity_quads,
                              const std::vector<int>& free_verts, double budget_ms) {
  if (free_verts.size() > 50)
    throw std::invalid_argument("untangle_local: more than 50 free vertices");
  UntangleResult res;
  if (cavity_quads.empty()) {
    res.success = true;
    res.min_sicn = 1.0;
    return res;
  }

  std::vector<double> sicn(cavity_quads.size());
  for (size_t i = 0; i < cavity_quads.size(); ++i) sicn[i] = quad_sicn(m, cavity_quads[i]);
  auto global_min = [&]() { return *std::min_element(sicn.begin(), sicn.end()); };

  // per free vertex: cavity slots its moves can change
  std::vector<std::vector<int>> touched(free_verts.size());
  for (size_t fi = 0; fi < free_verts.size(); ++fi)
    for (size_t i = 0; i < cavity_quads.size(); ++i) {
      const auto& q = m.quads[cavity_quads[i]];
      if (std::find(q.begin(), q.end(), free_verts[fi]) != q.end())
        touched[fi].push_back(static_cast<int>(i));
    }

  std::vector<double> step(free_verts.size());
  double scale = 0.0;
  for (size_t fi = 0; fi < free_verts.size(); ++fi) {
    auto nbr = m.vertex_neighbors(free_verts[fi]);
    double local = mean_incident_edge(m, free_verts[fi], nbr);
    if (local == 0.0) local = 1.0;
    step[fi] = 0.3 * local;
    scale = std::max(scale, local);
  }
  if (scale == 0.0) scale = 1.0;

  static const double kDiag = 1.0 / std::sqrt(2.0);
  static const Vec2 kDirs[8] = {Vec2(1, 0),          Vec2(-1, 0),         Vec2(0, 1),
                                Vec2(0, -1),         Vec2(kDiag, kDiag),  Vec2(-kDiag, kDiag),
                                Vec2(kDiag, -kDiag), Vec2(-kDiag, -kDiag)};

  std::vector<Vec2> saved = m.points;
  auto t0 = std::chrono::steady_clock::now();
  double cur = global_min();
  bool out_of_time = false;
  while (!out_of_time) {
    bool improved = false;
    for (size_t fi = 0; fi < free_verts.size() && !out_of_time; ++fi) {
      int v = free_verts[fi];
      for (int inner = 0; inner < 50; ++inner) {
        if (ms_since(t0) > budget_ms) {
          out_of_time = true;
          break;
        }
        double others = 1.0;
        {
          std::vector<char> mine(sicn.size(), 0);
          for (int i : touched[fi]) mine[i] = 1;
          for (size_t i = 0; i < sicn.size(); ++i)
            if (!mine[i]) others = std::min(others, sicn[i]);
        }
        bool stepped = false;
        Vec2 base = m.points[v];
        for (const auto& dir : kDirs) {
          m.points[v] = base + step[fi] * dir;
          double cand = others;
          for (int i : touched[fi])
            cand = std::min(cand, quad_sicn(m, cavity_quads[i]));
          if (cand > cur + 1e-15) {
            for (int i : touched[fi]) sicn[i] = quad_sicn(m, cavity_quads[i]);
            cur = cand;
            stepped = true;
            improved = true;
            break;
          }
        }
        if (!stepped) {
          m.points[v] = base;
          break;
        }
      }
    }
    if (!improved) {
      double hmax = free_verts.empty() ? 0.0 : *std::max_element(step.begin(), step.end());
      if (hmax < 1e-6 * scale) break;
      for (auto& h : step) h *= 0.5;
    }
  }

  res.min_sicn = cur;
  res.success = cur > 0.0;
  if (!res.success) {
    m.points = saved;
    double mn = 1.0;
    for (int id : cavity_quads) mn = std::min(mn, quad_sicn(m, id));
    res.min_sicn = mn;
  }
  return res;
}

}  // namespace quasiquad
