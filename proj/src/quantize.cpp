#include "quasiquad/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace quasiquad {

namespace {

constexpr int kSubdiv = 16;

double checked_inverse(const SizeEval& s, const Vec2& p) {
  double v = s(p);
  if (!(v > 0.0)) throw std::runtime_error("size field must be positive");
  return 1.0 / v;
}

// Sampled cumulative integral of dl / s from the curve start.
struct DemandTable {
  std::vector<double> arc;
  std::vector<double> val;
};

DemandTable build_table(const std::vector<Vec2>& pts, const SizeEval& s) {
  if (pts.size() < 2) throw std::invalid_argument("curve needs at least two points");
  DemandTable t;
  t.arc = {0.0};
  t.val = {0.0};
  double arc = 0.0;
  double inv_prev = checked_inverse(s, pts.front());
  for (size_t j = 0; j + 1 < pts.size(); ++j) {
    Vec2 a = pts[j], b = pts[j + 1];
    double step = (b - a).norm() / kSubdiv;
    for (int k = 1; k <= kSubdiv; ++k) {
      double inv = checked_inverse(s, a + (double(k) / kSubdiv) * (b - a));
      arc += step;
      t.arc.push_back(arc);
      t.val.push_back(t.val.back() + 0.5 * step * (inv_prev + inv));
      inv_prev = inv;
    }
  }
  return t;
}

// Arclength where the cumulative demand reaches f, by linear interpolation
// between table samples. Monotone in f.
double arc_at(const DemandTable& t, double f) {
  if (f <= 0.0) return 0.0;
  if (f >= t.val.back()) return t.arc.back();
  auto it = std::upper_bound(t.val.begin(), t.val.end(), f);
  size_t k = it - t.val.begin();
  double df = t.val[k] - t.val[k - 1];
  double w = df > 0.0 ? (f - t.val[k - 1]) / df : 0.0;
  return t.arc[k - 1] + w * (t.arc[k] - t.arc[k - 1]);
}

Vec2 point_at_arc(const std::vector<Vec2>& pts, double a) {
  double acc = 0.0;
  for (size_t j = 0; j + 1 < pts.size(); ++j) {
    double len = (pts[j + 1] - pts[j]).norm();
    if (a <= acc + len || j + 2 == pts.size()) {
      double w = len > 0.0 ? std::clamp((a - acc) / len, 0.0, 1.0) : 0.0;
      return pts[j] + w * (pts[j + 1] - pts[j]);
    }
    acc += len;
  }
  return pts.back();
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

double ideal_edge_count(const std::vector<Vec2>& pts, const SizeEval& s) {
  return build_table(pts, s).val.back();
}

CurvePlacement place_curve_vertices(const std::vector<Vec2>& pts, int n, const SizeEval& s) {
  if (n < 1) throw std::invalid_argument("edge count must be at least 1");
  DemandTable t = build_table(pts, s);
  CurvePlacement out;
  out.params.reserve(n - 1);
  out.points.reserve(n - 1);
  for (int i = 1; i < n; ++i) {
    double a = arc_at(t, t.val.back() * double(i) / n);
    out.params.push_back(a);
    out.points.push_back(point_at_arc(pts, a));
  }
  return out;
}

std::vector<int> build_chords(const PlanarModel& m, const std::vector<double>& ideal) {
  int n = int(m.curves.size());
  UnionFind uf(n);
  for (int f = 0; f < int(m.faces.size()); ++f) {
    auto loops = face_loops(m, f);
    if (loops.size() != 1 || loops[0].size() != 4) continue;
    for (int k = 0; k < 2; ++k) {
      int a = loops[0][k].curve;
      int b = loops[0][k + 2].curve;
      if (a == b) continue;
      double lo = std::min(ideal[a], ideal[b]);
      double hi = std::max(ideal[a], ideal[b]);
      if (hi > 2.0 * lo) continue;  // demands too far apart to couple
      uf.unite(a, b);
    }
  }
  std::vector<int> members(n, 0);
  for (int c = 0; c < n; ++c) ++members[uf.find(c)];
  std::vector<int> chord(n, -1);
  std::vector<int> root_id(n, -1);
  int next = 0;
  for (int c = 0; c < n; ++c) {
    int r = uf.find(c);
    if (members[r] < 2) continue;
    if (root_id[r] < 0) root_id[r] = next++;
    chord[c] = root_id[r];
  }
  return chord;
}

CurveQuantization quantize_curves(const PlanarModel& m, const SizeEval& s) {
  int n = int(m.curves.size());
  CurveQuantization q;
  q.ideal.resize(n);
  for (int c = 0; c < n; ++c) q.ideal[c] = ideal_edge_count(m.curves[c].pts, s);
  q.chord = build_chords(m, q.ideal);
  int groups = 0;
  for (int id : q.chord) groups = std::max(groups, id + 1);
  std::vector<double> sum(groups, 0.0);
  std::vector<int> cnt(groups, 0);
  for (int c = 0; c < n; ++c) {
    if (q.chord[c] < 0) continue;
    sum[q.chord[c]] += q.ideal[c];
    ++cnt[q.chord[c]];
  }
  q.count.resize(n);
  for (int c = 0; c < n; ++c) {
    double target = q.chord[c] < 0 ? q.ideal[c] : sum[q.chord[c]] / cnt[q.chord[c]];
    q.count[c] = std::max(1, int(std::lround(target)));
  }
  q.placed.reserve(n);
  for (int c = 0; c < n; ++c) q.placed.push_back(place_curve_vertices(m.curves[c].pts, q.count[c], s));
  return q;
}

}  // namespace quasiquad
