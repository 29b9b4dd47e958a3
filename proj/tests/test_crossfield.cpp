#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "quasiquad/crossfield.hpp"
#include "quasiquad/triangulate.hpp"

using namespace quasiquad;

namespace {

PlanarModel unit_square_model() {
  PlanarModel m;
  m.corners = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int i = 0; i < 4; ++i) {
    ModelCurve c;
    c.c0 = i;
    c.c1 = (i + 1) % 4;
    c.pts = {m.corners[c.c0], m.corners[c.c1]};
    m.curves.push_back(c);
  }
  m.faces.push_back({{1, 2, 3, 4}});
  return m;
}

PlanarModel disk_model(int nseg) {
  PlanarModel m;
  m.corners = {{1, 0}};
  ModelCurve c;
  c.c0 = 0;
  c.c1 = 0;
  for (int i = 0; i <= nseg; ++i) {
    double a = 2.0 * M_PI * i / nseg;
    c.pts.push_back({std::cos(a), std::sin(a)});
  }
  c.pts.back() = c.pts.front();
  m.curves.push_back(c);
  m.faces.push_back({{1}});
  return m;
}

TriMesh square_mesh(double h) {
  auto m = unit_square_model();
  auto chains = sample_curves(m, h);
  return triangulate_face(m, 0, chains, [h](const Vec2&) { return h; });
}

}  // namespace

TEST_CASE("lumped mass and stiffness assembly") {
  TriMesh mesh;
  mesh.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.labels.assign(4, {VertexClass::Corner, 0});
  mesh.tris = {{0, 1, 2}, {0, 2, 3}};
  mesh.build_edges();
  auto sys = assemble_cr_matrices(mesh);

  int shared = -1;
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (mesh.edges[e].t1 >= 0) shared = static_cast<int>(e);
  REQUIRE(shared >= 0);
  CHECK(sys.M[shared] == doctest::Approx((0.5 + 0.5) / 3.0));
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (static_cast<int>(e) != shared) CHECK(sys.M[e] == doctest::Approx(0.5 / 3.0));

  // rows sum to zero, constants lie in the kernel
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.K.rows());
  CHECK((sys.K * ones).cwiseAbs().maxCoeff() < 1e-12);
  // quadratic form positive on a non-constant vector
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.K.rows());
  x[shared] = 1.0;
  CHECK(x.dot(sys.K * x) > 0.1);
  CHECK(sys.K.rows() == static_cast<int>(mesh.edges.size()));
}

TEST_CASE("degenerate triangle is rejected") {
  TriMesh mesh;
  mesh.points = {{0, 0}, {1, 0}, {2, 0}};
  mesh.labels.assign(3, {VertexClass::Corner, 0});
  mesh.tris = {{0, 1, 2}};
  mesh.build_edges();
  CHECK_THROWS_AS(assemble_cr_matrices(mesh), std::runtime_error);
}

TEST_CASE("boundary edges carry tangent-aligned crosses") {
  auto mesh = square_mesh(0.25);
  auto f = boundary_aligned_field(mesh);
  int fixed = 0;
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    CHECK(f.u[e].norm() == doctest::Approx(1.0).epsilon(1e-12));
    if (f.fixed[e]) {
      ++fixed;
      CHECK(std::abs(f.theta(static_cast<int>(e))) < 1e-9);
    }
  }
  CHECK(fixed == 16);
}

TEST_CASE("extension fixes exactly the boundary-touching layer") {
  auto mesh = square_mesh(0.15);
  auto f = boundary_aligned_field(mesh);
  extend_boundary_conditions(mesh, f);

  std::vector<bool> on_boundary(mesh.points.size(), false);
  for (const auto& e : mesh.edges)
    if (e.t1 < 0) on_boundary[e.a] = on_boundary[e.b] = true;

  bool saw_free = false;
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    bool touch = false;
    for (int v : mesh.tris[t]) touch |= on_boundary[v];
    for (int e : mesh.tri_edges[t]) {
      if (touch)
        CHECK(f.fixed[e] == 1);
      else
        saw_free |= !f.fixed[e];
    }
  }
  CHECK(saw_free);
  for (size_t e = 0; e < mesh.edges.size(); ++e)
    if (f.fixed[e]) CHECK(f.u[e].norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two boundary edges force the third") {
  TriMesh mesh;
  mesh.points = {{0, 0}, {1, 0}, {0.5, 0.8}, {0.5, -0.8}};
  mesh.labels.assign(4, {VertexClass::Corner, 0});
  mesh.tris = {{0, 1, 2}, {0, 3, 1}};
  mesh.build_edges();
  auto f = boundary_aligned_field(mesh);
  extend_boundary_conditions(mesh, f);
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    CHECK(f.fixed[e] == 1);
    CHECK(f.u[e].norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("angle defect branch table") {
  CHECK(angle_diff(0.2, 0.2, 0.0) == doctest::Approx(0.0));
  CHECK(angle_diff(0.2 + M_PI_2, 0.2, 0.0) == doctest::Approx(0.0));
  // raw difference 0.3*pi folds down by pi/2
  CHECK(angle_diff(0.05 + 0.3 * M_PI, 0.05, 0.0) == doctest::Approx(-0.2 * M_PI));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  std::uniform_int_distribution<int> quarter(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    double tjk = uni(rng), tij = uni(rng), a = uni(rng);
    double d = angle_diff(tjk, tij, a);
    CHECK(std::abs(d) <= M_PI_4 + 1e-12);
    // invariant under the 4-fold symmetry of either argument
    double d2 = angle_diff(tjk + quarter(rng) * M_PI_2, tij + quarter(rng) * M_PI_2, a);
    CHECK(d2 == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("square face diffuses to an aligned field") {
  auto mesh = square_mesh(0.12);
  auto f = mbo_solve(mesh);
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    CHECK(f.u[e].norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(f.theta_global(static_cast<int>(e))) < 0.05);
  }
  auto sing = detect_singularities(f);
  CHECK(sing.entries.empty());
  CHECK(sing.defect_vertices.empty());
  // diffusion energy decreases outside rare projection blips
  CHECK(f.energy_increases * 100 <= f.iterations + 99);
}

TEST_CASE("disk face produces the four positive singularities") {
  auto m = disk_model(128);
  validate_model(m);
  auto chains = sample_curves(m, 0.08);
  auto mesh = triangulate_face(m, 0, chains, [](const Vec2&) { return 0.08; });
  auto f = mbo_solve(mesh);
  auto sing = detect_singularities(f);

  REQUIRE(sing.entries.size() == 4);
  int total = 0;
  for (const auto& s : sing.entries) {
    CHECK(s.index == 1);
    total += s.index;
    double r = s.position.norm();
    CHECK(r >= 0.6);
    CHECK(r <= 0.95);
  }
  CHECK(total == 4);  // matches 4 * Euler characteristic of the disk
}

TEST_CASE("synthetic vortex field carries index +1") {
  auto mesh = square_mesh(0.2);
  auto f = boundary_aligned_field(mesh);
  SUBCASE("constant field has no singularities") {
    for (auto& u : f.u) u = Vec2(1.0, 0.0);
    CHECK(detect_singularities(f).entries.empty());
  }
  SUBCASE("one quarter turn around the center") {
    for (size_t e = 0; e < mesh.edges.size(); ++e) {
      Vec2 mid = mesh.edge_midpoint(static_cast<int>(e)) - Vec2(0.5, 0.5);
      double phi = std::atan2(mid.y(), mid.x());
      f.u[e] = Vec2(std::cos(phi), std::sin(phi));
    }
    auto sing = detect_singularities(f);
    REQUIRE(sing.entries.size() == 1);
    CHECK(sing.entries[0].index == 1);
    CHECK((sing.entries[0].position - Vec2(0.5, 0.5)).norm() < 0.3);
  }
}

TEST_CASE("acute corners add artificial singularities") {
  SUBCASE("30 degree wedge") {
    PlanarModel m;
    double a = 30.0 * M_PI / 180.0;
    m.corners = {{0, 0}, {1, 0}, {std::cos(a), std::sin(a)}};
    auto add = [&](int i, int j) {
      ModelCurve c;
      c.c0 = i;
      c.c1 = j;
      c.pts = {m.corners[i], m.corners[j]};
      m.curves.push_back(c);
    };
    add(0, 1);
    add(1, 2);
    add(2, 0);
    m.faces.push_back({{1, 2, 3}});
    auto out = augment_acute_corners(m, 0, {});
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].index == 1);
    CHECK(out.entries[0].origin == SingularityOrigin::AcuteCorner);
    CHECK((out.entries[0].position - Vec2(0, 0)).norm() < 1e-12);
  }
  SUBCASE("square unchanged") {
    auto m = unit_square_model();
    CHECK(augment_acute_corners(m, 0, {}).entries.empty());
  }
  SUBCASE("thin sliver gains two") {
    PlanarModel m;
    m.corners = {{0, 0}, {1, 0}, {0.5, 0.06}};
    auto add = [&](int i, int j) {
      ModelCurve c;
      c.c0 = i;
      c.c1 = j;
      c.pts = {m.corners[i], m.corners[j]};
      m.curves.push_back(c);
    };
    add(0, 1);
    add(1, 2);
    add(2, 0);
    m.faces.push_back({{1, 2, 3}});
    CHECK(augment_acute_corners(m, 0, {}).entries.size() == 2);
  }
}

TEST_CASE("conformal scaling of a constant field") {
  auto mesh = square_mesh(0.2);
  auto f = boundary_aligned_field(mesh);
  for (auto& u : f.u) u = Vec2(1.0, 0.0);
  auto sc = conformal_scaling(f, 100.0);
  for (double H : sc.H) CHECK(std::abs(H) < 1e-10);
  CHECK(sc.C == doctest::Approx(-std::log(10.0)).epsilon(1e-9));
  for (double h : sc.h) CHECK(h == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("conformal scaling meets the quad budget on a disk") {
  auto m = disk_model(128);
  auto chains = sample_curves(m, 0.1);
  auto mesh = triangulate_face(m, 0, chains, [](const Vec2&) { return 0.1; });
  auto f = mbo_solve(mesh);
  auto sc = conformal_scaling(f, 500.0);
  for (double h : sc.h) CHECK(h > 0.0);

  // independent centroid quadrature of the inverse-square size
  double n_est = 0.0;
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    double hc = (sc.h[mesh.tris[t][0]] + sc.h[mesh.tris[t][1]] + sc.h[mesh.tris[t][2]]) / 3.0;
    n_est += mesh.tri_area(static_cast<int>(t)) / (hc * hc);
  }
  CHECK(n_est == doctest::Approx(500.0).epsilon(0.02));

  SUBCASE("anchor choice does not change the size") {
    auto sc2 = conformal_scaling(f, 500.0, static_cast<int>(mesh.points.size()) / 2);
    for (size_t v = 0; v < sc.h.size(); ++v)
      CHECK(sc2.h[v] == doctest::Approx(sc.h[v]).epsilon(1e-7));
  }

  SUBCASE("solution is a stationary point of the fitting energy") {
    auto energy = [&](const std::vector<double>& H) {
      double E = 0.0;
      for (size_t t = 0; t < mesh.tris.size(); ++t) {
        const Vec2& p0 = mesh.points[mesh.tris[t][0]];
        const Vec2& p1 = mesh.points[mesh.tris[t][1]];
        const Vec2& p2 = mesh.points[mesh.tris[t][2]];
        double area = 0.5 * cross2(p1 - p0, p2 - p0);
        double inv = 1.0 / (2.0 * area);
        std::array<Vec2, 3> g = {rot90(p2 - p1) * inv, rot90(p0 - p2) * inv,
                                 rot90(p1 - p0) * inv};
        const auto& te = mesh.tri_edges[t];
        auto ga = [&](int e) { return std::atan2(f.u[e].y(), f.u[e].x()) / 4.0; };
        double t0 = ga(te[0]);
        auto fold = [](double x) {
          x = std::fmod(x + M_PI_4, M_PI_2);
          if (x <= 0.0) x += M_PI_2;
          return x - M_PI_4;
        };
        double t1 = t0 + fold(ga(te[1]) - t0), t2 = t0 + fold(ga(te[2]) - t0);
        Vec2 gt = -2.0 * (t0 * g[2] + t1 * g[0] + t2 * g[1]);
        Vec2 target = rot90(gt);
        Vec2 gh = Vec2::Zero();
        for (int k = 0; k < 3; ++k) gh += H[mesh.tris[t][k]] * g[k];
        E += area * (gh - target).squaredNorm();
      }
      return E;
    };
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(mesh.points.size()) - 1);
    double delta = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
      int v = pick(rng);
      auto Hp = sc.H, Hm = sc.H;
      Hp[v] += delta;
      Hm[v] -= delta;
      double deriv = (energy(Hp) - energy(Hm)) / (2.0 * delta);
      CHECK(std::abs(deriv) < 1e-4);
    }
  }
}
