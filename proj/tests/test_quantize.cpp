#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "quasiquad/quantize.hpp"

using namespace quasiquad;

namespace {

std::vector<Vec2> segment(double len) { return {{0, 0}, {len, 0}}; }

// Test-side rebuild of the cumulative edge demand: trapezoid at the same 16
// subdivisions per polyline segment the library pins, evaluated up to
// arclength a by linear interpolation between samples.
struct DemandTable {
  std::vector<double> arc, val;
};

DemandTable demand_table(const std::vector<Vec2>& pts, const SizeEval& s) {
  DemandTable t;
  t.arc = {0.0};
  t.val = {0.0};
  double inv_prev = 1.0 / s(pts.front());
  double arc = 0.0;
  for (size_t j = 0; j + 1 < pts.size(); ++j) {
    double len = (pts[j + 1] - pts[j]).norm();
    for (int k = 1; k <= 16; ++k) {
      Vec2 p = pts[j] + (double(k) / 16) * (pts[j + 1] - pts[j]);
      double inv = 1.0 / s(p);
      arc += len / 16;
      t.arc.push_back(arc);
      t.val.push_back(t.val.back() + 0.5 * (len / 16) * (inv_prev + inv));
      inv_prev = inv;
    }
  }
  return t;
}

double table_at(const DemandTable& t, double a) {
  if (a <= t.arc.front()) return t.val.front();
  if (a >= t.arc.back()) return t.val.back();
  for (size_t k = 1; k < t.arc.size(); ++k) {
    if (a <= t.arc[k]) {
      double da = t.arc[k] - t.arc[k - 1];
      double f = da > 0 ? (a - t.arc[k - 1]) / da : 0.0;
      return t.val[k - 1] + f * (t.val[k] - t.val[k - 1]);
    }
  }
  return t.val.back();
}

// Independent placement oracle: bisection on the cumulative demand.
double oracle_param(const std::vector<Vec2>& pts, const SizeEval& s, int i, int n) {
  DemandTable t = demand_table(pts, s);
  double target = t.val.back() * double(i) / n;
  double lo = 0.0, hi = t.arc.back();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (table_at(t, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_increasing(const CurvePlacement& p) {
  double prev = 0.0;
  for (double a : p.params) {
    CHECK(a > prev);
    prev = a;
  }
}

PlanarModel two_face_model() {
  PlanarModel m;
  m.corners = {{0, 0}, {1, 0}, {4, 0}, {4, 1}, {1, 1}, {0, 1}};
  auto add = [&](int a, int b) {
    ModelCurve c;
    c.c0 = a;
    c.c1 = b;
    c.pts = {m.corners[a], m.corners[b]};
    m.curves.push_back(c);
  };
  add(0, 1);  // 0 bottom left
  add(1, 2);  // 1 bottom right
  add(2, 3);  // 2 right
  add(3, 4);  // 3 top right
  add(4, 5);  // 4 top left
  add(5, 0);  // 5 left
  add(1, 4);  // 6 shared vertical
  m.faces.push_back({{1, 7, 5, 6}});
  m.faces.push_back({{2, 3, 4, -7}});
  return m;
}

}  // namespace

TEST_CASE("edge demand matches closed forms") {
  SizeEval one = [](const Vec2&) { return 1.0; };
  CHECK(ideal_edge_count(segment(10.0), one) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(ideal_edge_count(segment(1.0), [](const Vec2&) { return 0.25; }) ==
        doctest::Approx(4.0).epsilon(1e-12));

  // s(x) = 1 + x/3 on [0,3]: integral of dx/s is 3 ln 2.
  SizeEval ramp = [](const Vec2& p) { return 1.0 + p.x() / 3.0; };
  const double three_ln2 = 2.0794415416798357;
  CHECK(std::abs(ideal_edge_count(segment(3.0), ramp) - three_ln2) < 1e-3);
  // same curve as a two-segment polyline refines per segment
  std::vector<Vec2> split = {{0, 0}, {1.2, 0}, {3, 0}};
  CHECK(std::abs(ideal_edge_count(split, ramp) - three_ln2) < 1e-3);
}

TEST_CASE("nonpositive size along the curve throws") {
  SizeEval bad = [](const Vec2& p) { return p.x(); };  // zero at the start
  CHECK_THROWS_WITH_AS(ideal_edge_count(segment(3.0), bad),
                       doctest::Contains("size field must be positive"), std::runtime_error);
  CHECK_THROWS_AS(ideal_edge_count({{0, 0}}, [](const Vec2&) { return 1.0; }),
                  std::invalid_argument);
}

TEST_CASE("uniform size places equally spaced vertices") {
  SizeEval one = [](const Vec2&) { return 1.0; };
  auto p = place_curve_vertices(segment(10.0), 10, one);
  REQUIRE(p.params.size() == 9);
  REQUIRE(p.points.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(p.params[i] == doctest::Approx(i + 1.0).epsilon(1e-12));
    CHECK(p.points[i].x() == doctest::Approx(i + 1.0).epsilon(1e-12));
    CHECK(p.points[i].y() == doctest::Approx(0.0).epsilon(1e-12));
  }
  check_increasing(p);
  CHECK(place_curve_vertices(segment(10.0), 1, one).points.empty());
}

TEST_CASE("piecewise size concentrates vertices in the fine half") {
  // s = 0.5 on x < 1 and 1.0 beyond; demand 2 + 1, thirds at x = 0.5 and 1.
  std::vector<Vec2> pts = {{0, 0}, {1, 0}, {2, 0}};
  SizeEval s = [](const Vec2& p) { return p.x() < 1.0 ? 0.5 : 1.0; };
  auto placed = place_curve_vertices(pts, 3, s);
  REQUIRE(placed.params.size() == 2);
  check_increasing(placed);
  CHECK(std::abs(placed.params[0] - 0.5) < 0.05);
  CHECK(std::abs(placed.params[1] - 1.0) < 0.05);
  CHECK(placed.params[0] < 0.75);
  for (int i = 1; i < 3; ++i)
    CHECK(std::abs(placed.params[i - 1] - oracle_param(pts, s, i, 3)) < 1e-6 * 2.0);
}

TEST_CASE("linear size ramp: placement matches the analytic solution") {
  // s(x) = 1 + x/3: vertex i of 3 sits at 3 (2^{i/3} - 1).
  SizeEval ramp = [](const Vec2& p) { return 1.0 + p.x() / 3.0; };
  auto pts = segment(3.0);
  auto placed = place_curve_vertices(pts, 3, ramp);
  REQUIRE(placed.params.size() == 2);
  CHECK(std::abs(placed.params[0] - 0.7797631496846196) < 2e-3);
  CHECK(std::abs(placed.params[1] - 1.7622031559045982) < 2e-3);
  for (int i = 1; i < 3; ++i)
    CHECK(std::abs(placed.params[i - 1] - oracle_param(pts, ramp, i, 3)) < 1e-6 * 3.0);
  check_increasing(placed);
  // points stay on the polyline
  for (size_t k = 0; k < placed.points.size(); ++k) {
    CHECK(placed.points[k].y() == 0.0);
    CHECK(placed.points[k].x() == doctest::Approx(placed.params[k]).epsilon(1e-12));
  }
}

TEST_CASE("interval growth stays inside the gradation envelope") {
  // |ds/dl| = 0.3 along the curve, so adjacent interval lengths may grow by
  // at most that slope times the local interval over the local size.
  const double g = 0.3;
  SizeEval s = [g](const Vec2& p) { return 1.0 + g * p.x(); };
  auto pts = segment(10.0);
  double ideal = ideal_edge_count(pts, s);
  int n = std::max(1, int(std::lround(ideal)));
  auto placed = place_curve_vertices(pts, n, s);
  check_increasing(placed);
  std::vector<double> cuts = {0.0};
  cuts.insert(cuts.end(), placed.params.begin(), placed.params.end());
  cuts.push_back(10.0);
  for (size_t i = 0; i + 2 < cuts.size(); ++i) {
    double la = cuts[i + 1] - cuts[i];
    double lb = cuts[i + 2] - cuts[i + 1];
    double r = std::max(la, lb) / std::min(la, lb);
    double smin = std::min(s(Vec2(cuts[i], 0)), s(Vec2(cuts[i + 1], 0)));
    CHECK(r <= 1.0 + g * std::max(la, lb) / smin + 1e-3);
  }
}

TEST_CASE("free curves round the edge demand") {
  PlanarModel m;
  m.corners = {{0, 0}, {2.6, 0}, {2.6, 3.4}, {2.4, 3.4}};
  auto add = [&](int a, int b) {
    ModelCurve c;
    c.c0 = a;
    c.c1 = b;
    c.pts = {m.corners[a], m.corners[b]};
    m.curves.push_back(c);
  };
  add(0, 1);  // length 2.6
  add(1, 2);  // length 3.4
  add(2, 3);  // length 0.2, demand below the minimum
  auto q = quantize_curves(m, [](const Vec2&) { return 1.0; });
  REQUIRE(q.count.size() == 3);
  CHECK(q.count[0] == 3);
  CHECK(q.count[1] == 3);
  CHECK(q.count[2] == 1);
  for (int c = 0; c < 3; ++c) {
    CHECK(q.chord[c] == -1);
    if (q.ideal[c] >= 0.5) CHECK(std::abs(q.count[c] - q.ideal[c]) <= 0.5);
    CHECK(int(q.placed[c].params.size()) == q.count[c] - 1);
  }
}

TEST_CASE("opposite sides of four-curve faces share a chord") {
  auto m = two_face_model();
  auto q = quantize_curves(m, [](const Vec2&) { return 0.35; });
  // bottoms, tops and the three verticals pair up across both rectangles
  CHECK(q.chord[0] == q.chord[4]);
  CHECK(q.chord[1] == q.chord[3]);
  CHECK(q.chord[2] == q.chord[5]);
  CHECK(q.chord[2] == q.chord[6]);
  CHECK(q.chord[0] != q.chord[1]);
  CHECK(q.chord[0] != q.chord[2]);
  for (int c : {0, 2, 4, 5, 6}) CHECK(q.count[c] == 3);
  CHECK(q.count[1] == 9);
  CHECK(q.count[3] == 9);
  // chord members always agree on the count
  for (size_t a = 0; a < q.chord.size(); ++a)
    for (size_t b = 0; b < q.chord.size(); ++b)
      if (q.chord[a] >= 0 && q.chord[a] == q.chord[b]) CHECK(q.count[a] == q.count[b]);
}

TEST_CASE("faces with other side counts add no chords") {
  PlanarModel m;
  m.corners = {{0, 0}, {2, 0}, {3, 1}, {1, 2}, {-1, 1}};
  for (int i = 0; i < 5; ++i) {
    ModelCurve c;
    c.c0 = i;
    c.c1 = (i + 1) % 5;
    c.pts = {m.corners[c.c0], m.corners[c.c1]};
    m.curves.push_back(c);
  }
  m.faces.push_back({{1, 2, 3, 4, 5}});
  auto q = quantize_curves(m, [](const Vec2&) { return 0.5; });
  for (int c = 0; c < 5; ++c) CHECK(q.chord[c] == -1);
}

TEST_CASE("opposite sides with very different demand stay free") {
  PlanarModel m;
  m.corners = {{0, 0}, {5, 0}, {3, 1}, {2, 1}};
  auto add = [&](int a, int b) {
    ModelCurve c;
    c.c0 = a;
    c.c1 = b;
    c.pts = {m.corners[a], m.corners[b]};
    m.curves.push_back(c);
  };
  add(0, 1);  // bottom, length 5
  add(1, 2);  // right, length sqrt(5)
  add(2, 3);  // top, length 1
  add(3, 0);  // left, length sqrt(5)
  m.faces.push_back({{1, 2, 3, 4}});
  auto q = quantize_curves(m, [](const Vec2&) { return 1.0; });
  CHECK(q.chord[0] == -1);  // 5 : 1 exceeds the 2 : 1 gate
  CHECK(q.chord[2] == -1);
  CHECK(q.chord[1] >= 0);
  CHECK(q.chord[1] == q.chord[3]);
  CHECK(q.count[0] == 5);
  CHECK(q.count[2] == 1);
  CHECK(q.count[1] == 2);
  CHECK(q.count[3] == 2);
}

TEST_CASE("field adapter feeds mesh sizes into curve integrals") {
  TriMesh mesh;
  mesh.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.labels.assign(4, {});
  mesh.tris = {{0, 1, 2}, {0, 2, 3}};
  mesh.build_edges();
  SizeField f{&mesh, {0.5, 0.5, 0.5, 0.5}};
  TriLocator loc(mesh);
  auto s = field_eval(f, loc);
  CHECK(s(Vec2(0.3, 0.4)) == doctest::Approx(0.5));
  CHECK(ideal_edge_count({{0, 0}, {1, 0}}, s) == doctest::Approx(2.0).epsilon(1e-9));
}
