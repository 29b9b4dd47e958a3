#include "quasiquad/crossfield.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quasiquad {

namespace {

constexpr double kHalfPi = M_PI_2;
constexpr double kQuarterPi = M_PI_4;

// fold into [0, pi/2)
double norm_quarter(double t) {
  t = std::fmod(t, kHalfPi);
  if (t < 0.0) t += kHalfPi;
  return t;
}

// fold into (-pi/4, pi/4]
double fold_eighth(double t) {
  t = std::fmod(t + kQuarterPi, kHalfPi);
  if (t <= 0.0) t += kHalfPi;
  return t - kQuarterPi;
}

// gradients of the three barycentric coordinates
std::array<Vec2, 3> bary_gradients(const TriMesh& mesh, int t, double& area) {
  const Vec2& p0 = mesh.points[mesh.tris[t][0]];
  const Vec2& p1 = mesh.points[mesh.tris[t][1]];
  const Vec2& p2 = mesh.points[mesh.tris[t][2]];
  area = 0.5 * cross2(p1 - p0, p2 - p0);
  if (area <= 0.0) throw std::runtime_error("degenerate triangle in FEM assembly");
  double inv = 1.0 / (2.0 * area);
  return {rot90(p2 - p1) * inv, rot90(p0 - p2) * inv, rot90(p1 - p0) * inv};
}

double edge_angle(const TriMesh& mesh, int e) {
  Vec2 d = mesh.points[mesh.edges[e].b] - mesh.points[mesh.edges[e].a];
  return std::atan2(d.y(), d.x());
}

std::vector<std::uint8_t> boundary_vertex_flags(const TriMesh& mesh) {
  std::vector<std::uint8_t> flags(mesh.points.size(), 0);
  for (const auto& e : mesh.edges)
    if (e.t1 < 0) {
      flags[e.a] = 1;
      flags[e.b] = 1;
    }
  return flags;
}

}  // namespace

CrSystem assemble_cr_matrices(const TriMesh& mesh) {
  if (mesh.edges.empty()) throw std::runtime_error("mesh edges not built");
  int ne = static_cast<int>(mesh.edges.size());
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd M = Eigen::VectorXd::Zero(ne);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    double area = 0.0;
    auto grad = bary_gradients(mesh, static_cast<int>(t), area);
    const auto& te = mesh.tri_edges[t];
    for (int a = 0; a < 3; ++a) {
      M[te[a]] += area / 3.0;
      for (int b = 0; b < 3; ++b) {
        // basis on edge (a, a+1) is 1 - 2 * lambda_(a+2)
        double v = 4.0 * area * grad[(a + 2) % 3].dot(grad[(b + 2) % 3]);
        trips.emplace_back(te[a], te[b], v);
      }
    }
  }
  CrSystem sys;
  sys.K.resize(ne, ne);
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.M = std::move(M);
  return sys;
}

double CrossField::theta_global(int e) const {
  return fold_eighth(std::atan2(u[e].y(), u[e].x()) / 4.0);
}

double CrossField::theta(int e) const {
  return fold_eighth(std::atan2(u[e].y(), u[e].x()) / 4.0 - edge_angle(*mesh, e));
}

CrossField boundary_aligned_field(const TriMesh& mesh) {
  if (mesh.edges.empty()) throw std::runtime_error("mesh edges not built");
  CrossField f;
  f.mesh = &mesh;
  f.u.assign(mesh.edges.size(), Vec2(1.0, 0.0));
  f.fixed.assign(mesh.edges.size(), 0);
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    if (mesh.edges[e].t1 >= 0) continue;
    double a = edge_angle(mesh, static_cast<int>(e));
    f.u[e] = Vec2(std::cos(4.0 * a), std::sin(4.0 * a));
    f.fixed[e] = 1;
  }
  return f;
}

void extend_boundary_conditions(const TriMesh& mesh, CrossField& f) {
  auto on_boundary = boundary_vertex_flags(mesh);
  std::vector<std::uint8_t> in_layer(mesh.tris.size(), 0);
  std::vector<std::uint8_t> layer_edge(mesh.edges.size(), 0);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    bool touch = false;
    for (int v : mesh.tris[t]) touch |= on_boundary[v] != 0;
    if (!touch) continue;
    in_layer[t] = 1;
    for (int e : mesh.tri_edges[t]) layer_edge[e] = 1;
  }

  // harmonic fill of the layer, boundary crosses as Dirichlet data
  std::vector<int> fidx(mesh.edges.size(), -1);
  std::vector<int> free_edges;
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (layer_edge[e] && !f.fixed[e]) {
      fidx[e] = static_cast<int>(free_edges.size());
      free_edges.push_back(static_cast<int>(e));
    }
  if (!free_edges.empty()) {
    int nf = static_cast<int>(free_edges.size());
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, 2);
    for (size_t t = 0; t < mesh.tris.size(); ++t) {
      if (!in_layer[t]) continue;
      double area = 0.0;
      auto grad = bary_gradients(mesh, static_cast<int>(t), area);
      const auto& te = mesh.tri_edges[t];
      for (int a = 0; a < 3; ++a) {
        if (fidx[te[a]] < 0) continue;
        for (int b = 0; b < 3; ++b) {
          double v = 4.0 * area * grad[(a + 2) % 3].dot(grad[(b + 2) % 3]);
          if (fidx[te[b]] >= 0)
            trips.emplace_back(fidx[te[a]], fidx[te[b]], v);
          else
            rhs.row(fidx[te[a]]) -= v * Eigen::RowVector2d(f.u[te[b]].x(), f.u[te[b]].y());
        }
      }
    }
    Eigen::SparseMatrix<double> A(nf, nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("boundary layer factorization failed");
    Eigen::MatrixXd X = solver.solve(rhs);
    for (int i = 0; i < nf; ++i) {
      Vec2 v(X(i, 0), X(i, 1));
      f.u[free_edges[i]] = v.norm() < 1e-12 ? Vec2(1.0, 0.0) : Vec2(v / v.norm());
    }
  }
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (layer_edge[e]) f.fixed[e] = 1;
}

CrossField mbo_solve(const TriMesh& mesh, int levels, double tol) {
  if (levels < 1) throw std::runtime_error("at least one diffusion level required");
  auto sys = assemble_cr_matrices(mesh);
  CrossField f = boundary_aligned_field(mesh);
  extend_boundary_conditions(mesh, f);

  int ne = static_cast<int>(mesh.edges.size());
  std::vector<int> fidx(ne, -1);
  std::vector<int> free_edges;
  for (int e = 0; e < ne; ++e)
    if (!f.fixed[e]) {
      fidx[e] = static_cast<int>(free_edges.size());
      free_edges.push_back(e);
    }
  int nf = static_cast<int>(free_edges.size());
  if (nf == 0) return f;

  // reduced stiffness and the constant coupling to Dirichlet edges
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nf, 2);
  for (int col = 0; col < sys.K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it) {
      int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (fidx[r] < 0) continue;
      if (fidx[c] >= 0)
        trips.emplace_back(fidx[r], fidx[c], it.value());
      else
        G.row(fidx[r]) += it.value() * Eigen::RowVector2d(f.u[c].x(), f.u[c].y());
    }
  }
  Eigen::SparseMatrix<double> Kff(nf, nf);
  Kff.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd Mf(nf);
  for (int i = 0; i < nf; ++i) Mf[i] = sys.M[free_edges[i]];

  BBox box;
  for (const auto& p : mesh.points) box.expand(p);
  double h_min = std::numeric_limits<double>::max();
  for (const auto& e : mesh.edges)
    h_min = std::min(h_min, (mesh.points[e.a] - mesh.points[e.b]).norm());
  double a_init = std::pow(0.1 * box.diag(), 2);
  double a_final = std::pow(3.0 * h_min, 2);

  auto dirichlet_energy = [&](const Eigen::MatrixXd& U) {
    Eigen::MatrixXd full(ne, 2);
    for (int e = 0; e < ne; ++e)
      full.row(e) = fidx[e] >= 0 ? U.row(fidx[e]) : Eigen::RowVector2d(f.u[e].x(), f.u[e].y());
    return (full.transpose() * (sys.K * full)).trace();
  };

  Eigen::MatrixXd U(nf, 2);
  for (int i = 0; i < nf; ++i) U.row(i) = Eigen::RowVector2d(f.u[free_edges[i]].x(), f.u[free_edges[i]].y());

  for (int l = 1; l <= levels; ++l) {
    double alpha = levels == 1 ? a_final
                               : a_init + (a_final - a_init) * (l - 1) / (levels - 1);
    Eigen::SparseMatrix<double> A = Kff;
    for (int i = 0; i < nf; ++i) A.coeffRef(i, i) += Mf[i] / alpha;
    A.makeCompressed();
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.compute(A);
    if (cg.info() != Eigen::Success) throw std::runtime_error("diffusion preconditioner failed");

    double prev_energy = dirichlet_energy(U);
    for (int iter = 0; iter < 100; ++iter) {
      Eigen::MatrixXd B(nf, 2);
      for (int c = 0; c < 2; ++c) B.col(c) = Mf.cwiseProduct(U.col(c)) / alpha - G.col(c);
      Eigen::MatrixXd X = cg.solve(B);
      if (cg.info() != Eigen::Success)
        throw std::runtime_error("diffusion solve did not converge, residual " +
                                 std::to_string(cg.error()));
      for (int i = 0; i < nf; ++i) {
        double n = X.row(i).norm();
        if (n < 1e-12)
          X.row(i) = U.row(i);
        else
          X.row(i) /= n;
      }
      double delta = (X - U).cwiseAbs().maxCoeff();
      U = X;
      ++f.iterations;
      double energy = dirichlet_energy(U);
      if (energy > prev_energy * (1.0 + 1e-8)) ++f.energy_increases;
      prev_energy = energy;
      if (delta <= tol) break;
    }
  }
  for (int i = 0; i < nf; ++i) f.u[free_edges[i]] = Vec2(U(i, 0), U(i, 1));
  return f;
}

double angle_diff(double theta_jk, double theta_ij, double alpha_j) {
  double d = norm_quarter(theta_jk + alpha_j) - norm_quarter(theta_ij);
  if (d > kQuarterPi) d -= kHalfPi;
  if (d < -kQuarterPi) d += kHalfPi;
  return d;
}

SingularityList detect_singularities(const CrossField& f) {
  const TriMesh& mesh = *f.mesh;
  SingularityList list;
  auto on_boundary = boundary_vertex_flags(mesh);

  struct Spoke {
    double angle;
    int edge;
  };
  std::vector<std::vector<Spoke>> spokes(mesh.points.size());
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    Vec2 d = mesh.points[mesh.edges[e].b] - mesh.points[mesh.edges[e].a];
    double a = std::atan2(d.y(), d.x());
    spokes[mesh.edges[e].a].push_back({a, static_cast<int>(e)});
    double rev = a <= 0.0 ? a + M_PI : a - M_PI;
    spokes[mesh.edges[e].b].push_back({rev, static_cast<int>(e)});
  }

  std::vector<int> vindex(mesh.points.size(), 0);
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    if (on_boundary[v] || spokes[v].empty()) continue;
    auto& sp = spokes[v];
    std::sort(sp.begin(), sp.end(), [](const Spoke& x, const Spoke& y) { return x.angle < y.angle; });
    double sum = 0.0;
    for (size_t k = 0; k < sp.size(); ++k) {
      const Spoke& s0 = sp[k];
      const Spoke& s1 = sp[(k + 1) % sp.size()];
      double alpha = s1.angle - s0.angle;
      if (alpha <= 0.0) alpha += 2.0 * M_PI;
      double t0 = std::atan2(f.u[s0.edge].y(), f.u[s0.edge].x()) / 4.0 - s0.angle;
      double t1 = std::atan2(f.u[s1.edge].y(), f.u[s1.edge].x()) / 4.0 - s1.angle;
      sum += angle_diff(t1, t0, alpha);
    }
    int idx = static_cast<int>(std::lround(sum / kHalfPi));
    if (std::abs(idx) >= 2) {
      list.defect_vertices.push_back(static_cast<int>(v));
      continue;
    }
    vindex[v] = idx;
  }

  // collapse edge-connected clusters of equal index
  std::vector<std::vector<int>> nbr(mesh.points.size());
  for (const auto& e : mesh.edges) {
    if (vindex[e.a] != 0 && vindex[e.b] != 0) {
      nbr[e.a].push_back(e.b);
      nbr[e.b].push_back(e.a);
    }
  }
  std::vector<std::uint8_t> done(mesh.points.size(), 0);
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    if (vindex[v] == 0 || done[v]) continue;
    std::vector<int> comp{static_cast<int>(v)};
    done[v] = 1;
    for (size_t head = 0; head < comp.size(); ++head)
      for (int w : nbr[comp[head]])
        if (!done[w]) {
          done[w] = 1;
          comp.push_back(w);
        }
    bool consistent = true;
    for (int w : comp) consistent &= vindex[w] == vindex[comp[0]];
    if (!consistent) {
      list.defect_vertices.insert(list.defect_vertices.end(), comp.begin(), comp.end());
      continue;
    }
    Vec2 pos = Vec2::Zero();
    for (int w : comp) pos += mesh.points[w];
    pos /= static_cast<double>(comp.size());
    list.entries.push_back({pos, vindex[comp[0]], SingularityOrigin::Field});
  }
  return list;
}

SingularityList augment_acute_corners(const PlanarModel& m, int face, SingularityList list) {
  for (const auto& loop : face_loops(m, face)) {
    auto angles = loop_corner_angles(m, loop);
    for (size_t i = 0; i < loop.size(); ++i) {
      if (angles[i] < kQuarterPi) {
        Vec2 apex = loop[i].oriented_pts(m).front();
        list.entries.push_back({apex, +1, SingularityOrigin::AcuteCorner});
      }
    }
  }
  return list;
}

ConformalScaling conformal_scaling(const CrossField& f, double target_quads, int anchor) {
  const TriMesh& mesh = *f.mesh;
  int nv = static_cast<int>(mesh.points.size());
  if (anchor < 0 || anchor >= nv) throw std::runtime_error("bad anchor vertex");
  if (!(target_quads > 0.0)) throw std::runtime_error("quad target must be positive");

  // least-squares potential for the rotated per-triangle angle gradient
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    double area = 0.0;
    auto grad = bary_gradients(mesh, static_cast<int>(t), area);
    const auto& te = mesh.tri_edges[t];
    double t0 = std::atan2(f.u[te[0]].y(), f.u[te[0]].x()) / 4.0;
    double t1 = t0 + fold_eighth(std::atan2(f.u[te[1]].y(), f.u[te[1]].x()) / 4.0 - t0);
    double t2 = t0 + fold_eighth(std::atan2(f.u[te[2]].y(), f.u[te[2]].x()) / 4.0 - t0);
    // edge basis k is 1 - 2 * lambda_(k+2)
    Vec2 gtheta = -2.0 * (t0 * grad[2] + t1 * grad[0] + t2 * grad[1]);
    Vec2 g = rot90(gtheta);
    for (int a = 0; a < 3; ++a) {
      rhs[mesh.tris[t][a]] += area * grad[a].dot(g);
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(mesh.tris[t][a], mesh.tris[t][b], area * grad[a].dot(grad[b]));
    }
  }

  std::vector<int> fidx(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (v != anchor) fidx[v] = nf++;
  std::vector<Eigen::Triplet<double>> rtrips;
  for (const auto& tr : trips)
    if (fidx[tr.row()] >= 0 && fidx[tr.col()] >= 0)
      rtrips.emplace_back(fidx[tr.row()], fidx[tr.col()], tr.value());
  Eigen::SparseMatrix<double> A(nf, nf);
  A.setFromTriplets(rtrips.begin(), rtrips.end());
  Eigen::VectorXd b(nf);
  for (int v = 0; v < nv; ++v)
    if (fidx[v] >= 0) b[fidx[v]] = rhs[v];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("scaling factorization failed");
  Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("scaling solve failed");

  ConformalScaling out;
  out.H.assign(nv, 0.0);
  for (int v = 0; v < nv; ++v)
    if (fidx[v] >= 0) out.H[v] = x[fidx[v]];
  double mean = 0.0;
  for (double h : out.H) mean += h;
  mean /= nv;
  for (double& h : out.H) h -= mean;

  // edge-midpoint quadrature of e^(-2H), exact for quadratic integrands
  double integral = 0.0;
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    double area = mesh.tri_area(static_cast<int>(t));
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      double hm = 0.5 * (out.H[mesh.tris[t][k]] + out.H[mesh.tris[t][(k + 1) % 3]]);
      s += std::exp(-2.0 * hm);
    }
    integral += area * s / 3.0;
  }
  out.C = -0.5 * std::log(target_quads / integral);
  out.h.resize(nv);
  for (int v = 0; v < nv; ++v) out.h[v] = std::exp(out.H[v] + out.C);
  return out;
}

}  // namespace quasiquad
