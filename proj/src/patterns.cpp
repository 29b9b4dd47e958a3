#include "quasiquad/patterns.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"
#include "quasiquad/model.hpp"
#include "quasiquad/quality.hpp"
#include "quasiquad/smoothing.hpp"

namespace quasiquad {

namespace {

int dsu_find(std::vector<int>& up, int x) {
  while (up[x] != x) {
    up[x] = up[up[x]];
    x = up[x];
  }
  return x;
}

void dsu_union(std::vector<int>& up, int a, int b) {
  up[dsu_find(up, a)] = dsu_find(up, b);
}

[[noreturn]] void bad_pattern(const std::string& name, const std::string& why) {
  throw std::invalid_argument("pattern '" + name + "': " + why);
}

// Side counts as seen from the pattern after applying an alignment: rotation
// picks the cavity side facing pattern side 0, reversal walks the cavity
// backwards.
std::vector<int> align_side_counts(const std::vector<int>& n, int rot, bool rev) {
  int m = int(n.size());
  std::vector<int> out(m);
  for (int k = 0; k < m; ++k)
    out[k] = rev ? n[((rot - k) % m + m) % m] : n[(rot + k) % m];
  return out;
}

// Per-chord target that splits every side evenly among the chords crossing
// it, averaged over the sides the chord touches (crossings weighted).
std::vector<double> chord_ideals(const Pattern& p, const std::vector<int>& np) {
  int m = int(p.sides.size());
  int c = p.chord_count;
  std::vector<int> total(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < c; ++j) total[i] += p.weight[i][j];
  std::vector<double> ideal(c, 1.0);
  for (int j = 0; j < c; ++j) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      if (p.weight[i][j] == 0) continue;
      num += p.weight[i][j] * (double(np[i]) / total[i]);
      den += p.weight[i][j];
    }
    ideal[j] = num / den;
  }
  return ideal;
}

// Fraction-free integer row echelon of [W | n]. Rows are gcd-reduced after
// each elimination so entries stay tiny.
struct Echelon {
  std::vector<std::vector<long long>> rows;
  std::vector<int> pivot_col;  // one per row, strictly ascending
  std::vector<int> free_cols;
};

bool build_echelon(const Pattern& p, const std::vector<int>& np, Echelon& e) {
  int m = int(p.sides.size());
  int c = p.chord_count;
  std::vector<std::vector<long long>> rows(m, std::vector<long long>(c + 1, 0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < c; ++j) rows[i][j] = p.weight[i][j];
    rows[i][c] = np[i];
  }
  int rank = 0;
  std::vector<char> is_pivot(c, 0);
  for (int col = 0; col < c && rank < m; ++col) {
    int piv = -1;
    for (int r = rank; r < m; ++r)
      if (rows[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[rank], rows[piv]);
    for (int r = rank + 1; r < m; ++r) {
      if (rows[r][col] == 0) continue;
      long long a = rows[rank][col], b = rows[r][col];
      for (int k = 0; k <= c; ++k) rows[r][k] = rows[r][k] * a - rows[rank][k] * b;
      long long g = 0;
      for (int k = 0; k <= c; ++k) g = std::gcd(g, std::llabs(rows[r][k]));
      if (g > 1)
        for (int k = 0; k <= c; ++k) rows[r][k] /= g;
    }
    e.pivot_col.push_back(col);
    is_pivot[col] = 1;
    ++rank;
  }
  for (int r = rank; r < m; ++r)
    if (rows[r][c] != 0) return false;
  rows.resize(rank);
  e.rows = std::move(rows);
  for (int j = 0; j < c; ++j)
    if (!is_pivot[j]) e.free_cols.push_back(j);
  return true;
}

// Fix the free chords, recover the pivots bottom-up. Fails on fractional or
// nonpositive values.
bool back_substitute(const Echelon& e, int c, const std::vector<int>& free_vals,
                     std::vector<long long>& s) {
  s.assign(c, 0);
  for (size_t t = 0; t < e.free_cols.size(); ++t) s[e.free_cols[t]] = free_vals[t];
  for (int r = int(e.rows.size()) - 1; r >= 0; --r) {
    int pc = e.pivot_col[r];
    long long acc = e.rows[r][c];
    for (int k = pc + 1; k < c; ++k) acc -= e.rows[r][k] * s[k];
    long long den = e.rows[r][pc];
    if (acc % den != 0) return false;
    long long v = acc / den;
    if (v < 1) return false;
    s[pc] = v;
  }
  return true;
}

struct AlignSolve {
  bool found = false;
  double objective = 0.0;
  std::vector<int> s;
};

constexpr int kMatchBudget = 500;

AlignSolve solve_alignment(const Pattern& p, const std::vector<int>& np) {
  AlignSolve out;
  int m = int(p.sides.size());
  int c = p.chord_count;

  // Upper bound per chord: the other crossings of any side it meets take at
  // least one edge each.
  std::vector<int> total(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < c; ++j) total[i] += p.weight[i][j];
  std::vector<int> bound(c, std::numeric_limits<int>::max());
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < m; ++i) {
      int w = p.weight[i][j];
      if (w == 0) continue;
      int room = np[i] - (total[i] - w);
      if (room < w) return out;
      bound[j] = std::min(bound[j], room / w);
    }
    if (bound[j] < 1) return out;
  }

  Echelon e;
  if (!build_echelon(p, np, e)) return out;
  std::vector<double> ideal = chord_ideals(p, np);
  int f = int(e.free_cols.size());

  std::vector<long long> s;
  auto consider = [&](const std::vector<long long>& sv) {
    double obj = 0.0;
    for (int j = 0; j < c; ++j) {
      double d = double(sv[j]) - ideal[j];
      obj += d * d;
    }
    if (!out.found || obj < out.objective) {
      out.found = true;
      out.objective = obj;
      out.s.assign(sv.begin(), sv.end());
    }
  };

  if (f == 0) {
    if (back_substitute(e, c, {}, s)) {
      bool ok = true;
      for (int j = 0; j < c; ++j) ok = ok && s[j] <= bound[j];
      if (ok) consider(s);
    }
    return out;
  }

  // Search base: project the balanced ideal onto the affine solution set
  // (least-squares correction), then round into range. The projection keeps
  // the base near actual solutions, so small rings reach them.
  std::vector<int> base(f, 1);
  {
    Eigen::MatrixXd w(m, c);
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < c; ++j) {
        w(i, j) = p.weight[i][j];
        acc += p.weight[i][j] * ideal[j];
      }
      r(i) = np[i] - acc;
    }
    Eigen::VectorXd d = w.completeOrthogonalDecomposition().solve(r);
    for (int t = 0; t < f; ++t) {
      int j = e.free_cols[t];
      long long v = llround(ideal[j] + d(j));
      base[t] = int(std::clamp(v, 1LL, (long long)bound[j]));
    }
  }

  // Ring search: visit free-variable offsets by ascending L1 distance from
  // the base, each back-substitution attempt costing one unit of budget.
  std::vector<int> dmin(f), dmax(f), cap(f + 1, 0);
  for (int t = 0; t < f; ++t) {
    dmin[t] = 1 - base[t];
    dmax[t] = bound[e.free_cols[t]] - base[t];
  }
  for (int t = f - 1; t >= 0; --t) cap[t] = cap[t + 1] + std::max(-dmin[t], dmax[t]);

  int nodes = kMatchBudget;
  std::vector<int> delta(f, 0), vals(f, 0);
  auto attempt = [&]() {
    if (nodes <= 0) return;
    --nodes;
    for (int t = 0; t < f; ++t) vals[t] = base[t] + delta[t];
    if (back_substitute(e, c, vals, s)) {
      bool ok = true;
      for (int j = 0; j < c; ++j) ok = ok && s[j] <= bound[j];
      if (ok) consider(s);
    }
  };
  std::function<void(int, int)> gen = [&](int i, int rem) {
    if (nodes <= 0 || rem > cap[i]) return;
    if (i == f - 1) {
      if (rem == 0) {
        delta[i] = 0;
        attempt();
        return;
      }
      if (rem <= dmax[i]) {
        delta[i] = rem;
        attempt();
      }
      if (nodes > 0 && -rem >= dmin[i]) {
        delta[i] = -rem;
        attempt();
      }
      return;
    }
    int lo = std::max(dmin[i], -rem), hi = std::min(dmax[i], rem);
    for (int d = lo; d <= hi && nodes > 0; ++d) {
      delta[i] = d;
      gen(i + 1, rem - std::abs(d));
    }
  };
  for (int radius = 0; radius <= cap[0] && nodes > 0; ++radius) gen(0, radius);
  return out;
}

}  // namespace

Pattern make_pattern(std::string name, std::vector<Vec2> points,
                     std::vector<std::array<int, 4>> quads,
                     std::vector<std::vector<int>> sides) {
  Pattern p;
  p.name = std::move(name);
  p.points = std::move(points);
  p.quads = std::move(quads);
  p.sides = std::move(sides);

  int n = int(p.points.size());
  int nq = int(p.quads.size());
  if (nq == 0) bad_pattern(p.name, "no quads");
  if (p.sides.size() < 2) bad_pattern(p.name, "fewer than two sides");
  for (const auto& q : p.quads)
    for (int v : q)
      if (v < 0 || v >= n) bad_pattern(p.name, "quad vertex out of range");
  for (const auto& side : p.sides) {
    if (side.size() < 2) bad_pattern(p.name, "side with fewer than two points");
    for (int v : side)
      if (v < 0 || v >= n) bad_pattern(p.name, "side vertex out of range");
  }
  for (int q = 0; q < nq; ++q)
    if (sicn_quality({p.points[p.quads[q][0]], p.points[p.quads[q][1]],
                      p.points[p.quads[q][2]], p.points[p.quads[q][3]]}) <= 0.0)
      bad_pattern(p.name, "layout quad " + std::to_string(q) + " is not convex CCW");

  QuadMesh mesh;
  mesh.points = p.points;
  mesh.labels.assign(p.points.size(), VertexLabel{});
  mesh.quads = p.quads;
  try {
    mesh.build_connectivity();
  } catch (const std::exception& ex) {
    bad_pattern(p.name, ex.what());
  }
  require_census(mesh, "pattern '" + p.name + "'");

  // Chords: orbits of the opposite-edge relation inside each quad. Ids
  // follow first encounter in half-edge order so they are reproducible.
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<std::array<int, 4>> eid(nq);
  for (int q = 0; q < nq; ++q)
    for (int k = 0; k < 4; ++k) {
      int a = p.quads[q][k], b = p.quads[q][(k + 1) % 4];
      std::pair<int, int> key(std::min(a, b), std::max(a, b));
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) it = edge_ids.emplace(key, int(edge_ids.size())).first;
      eid[q][k] = it->second;
    }
  std::vector<int> up(edge_ids.size());
  std::iota(up.begin(), up.end(), 0);
  for (int q = 0; q < nq; ++q) {
    dsu_union(up, eid[q][0], eid[q][2]);
    dsu_union(up, eid[q][1], eid[q][3]);
  }
  std::map<int, int> chord_of_root;
  p.edge_chord.assign(4 * nq, -1);
  for (int he = 0; he < 4 * nq; ++he) {
    int root = dsu_find(up, eid[he / 4][he % 4]);
    auto it = chord_of_root.find(root);
    if (it == chord_of_root.end())
      it = chord_of_root.emplace(root, int(chord_of_root.size())).first;
    p.edge_chord[he] = it->second;
  }
  p.chord_count = int(chord_of_root.size());

  // Sides must chain around the boundary, covering each boundary edge once
  // in CCW direction.
  int m = int(p.sides.size());
  for (int i = 0; i < m; ++i)
    if (p.sides[i].back() != p.sides[(i + 1) % m].front())
      bad_pattern(p.name, "side " + std::to_string(i) + " does not reach the next side");
  std::map<std::pair<int, int>, int> boundary_he;
  for (int he = 0; he < 4 * nq; ++he)
    if (mesh.twin[he] < 0) boundary_he[{mesh.he_from(he), mesh.he_to(he)}] = he;
  std::set<int> used;
  p.weight.assign(m, std::vector<int>(p.chord_count, 0));
  for (int i = 0; i < m; ++i)
    for (size_t u = 0; u + 1 < p.sides[i].size(); ++u) {
      auto it = boundary_he.find({p.sides[i][u], p.sides[i][u + 1]});
      if (it == boundary_he.end())
        bad_pattern(p.name, "side edge is not a CCW boundary edge");
      if (!used.insert(it->second).second)
        bad_pattern(p.name, "boundary edge listed twice");
      p.weight[i][p.edge_chord[it->second]] += 1;
    }
  if (used.size() != boundary_he.size())
    bad_pattern(p.name, "sides do not cover the whole boundary");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p.chord_count; ++j)
      if (p.weight[i][j] > 2)
        bad_pattern(p.name, "a chord crosses one side more than twice");
  for (int j = 0; j < p.chord_count; ++j) {
    int hits = 0;
    for (int i = 0; i < m; ++i) hits += p.weight[i][j];
    if (hits < 1) bad_pattern(p.name, "a chord never reaches the boundary");
  }
  return p;
}

PatternCatalogue load_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw std::runtime_error("cannot parse pattern file " + path + ": " + ex.what());
  }
  if (!j.is_object() || !j.contains("patterns") || !j["patterns"].is_array())
    throw std::runtime_error("pattern file " + path + " lacks a \"patterns\" array");
  PatternCatalogue cat;
  try {
    for (const auto& jp : j["patterns"]) {
      std::vector<Vec2> pts;
      for (const auto& xy : jp.at("points"))
        pts.emplace_back(xy.at(0).get<double>(), xy.at(1).get<double>());
      std::vector<std::array<int, 4>> quads;
      for (const auto& q : jp.at("quads"))
        quads.push_back({q.at(0).get<int>(), q.at(1).get<int>(), q.at(2).get<int>(),
                         q.at(3).get<int>()});
      std::vector<std::vector<int>> sides;
      for (const auto& sd : jp.at("sides")) sides.push_back(sd.get<std::vector<int>>());
      cat.patterns.push_back(make_pattern(jp.at("name").get<std::string>(),
                                          std::move(pts), std::move(quads),
                                          std::move(sides)));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error("pattern file " + path + " is malformed: " + ex.what());
  }
  return cat;
}

const PatternCatalogue& builtin_catalogue() {
  static const PatternCatalogue cat = load_patterns(QUASIQUAD_DATA_DIR "/patterns.json");
  return cat;
}

std::optional<PatternMatch> match_pattern(const Pattern& p, const std::vector<int>& sides) {
  int m = int(p.sides.size());
  if (int(sides.size()) != m)
    throw std::invalid_argument("match_pattern: side count mismatch with pattern '" +
                                p.name + "'");
  for (int v : sides)
    if (v < 1) throw std::invalid_argument("match_pattern: side counts must be positive");

  std::optional<PatternMatch> best;
  for (int rot = 0; rot < m; ++rot)
    for (int rev = 0; rev < 2; ++rev) {
      AlignSolve sol = solve_alignment(p, align_side_counts(sides, rot, rev == 1));
      if (!sol.found) continue;
      if (!best || sol.objective < best->objective) {
        PatternMatch mm;
        mm.s = std::move(sol.s);
        mm.rotation = rot;
        mm.reversed = rev == 1;
        mm.objective = sol.objective;
        best = std::move(mm);
      }
    }
  return best;
}

int aligned_chain_index(const PatternMatch& match, const std::vector<int>& side_counts,
                        int t) {
  int m = int(side_counts.size());
  std::vector<int> off(m + 1, 0);
  for (int i = 0; i < m; ++i) off[i + 1] = off[i] + side_counts[i];
  int b = off[m];
  if (t < 0 || t >= b) throw std::out_of_range("aligned_chain_index: slot out of range");
  int rot = ((match.rotation % m) + m) % m;
  if (!match.reversed) return (off[rot] + t) % b;
  return ((off[rot + 1] - t) % b + b) % b;
}

QuadMesh instantiate_pattern(const Pattern& p, const PatternMatch& match,
                             const std::vector<Vec2>& chain,
                             const std::vector<int>& side_counts, bool smooth) {
  int m = int(p.sides.size());
  int c = p.chord_count;
  if (int(side_counts.size()) != m)
    throw std::invalid_argument("instantiate_pattern: side count mismatch");
  if (int(match.s.size()) != c)
    throw std::invalid_argument("instantiate_pattern: subdivision vector size mismatch");
  for (int v : match.s)
    if (v < 1) throw std::invalid_argument("instantiate_pattern: nonpositive subdivision");
  long long b = 0;
  for (int v : side_counts) b += v;
  if ((long long)chain.size() != b)
    throw std::invalid_argument("instantiate_pattern: chain length does not match side counts");
  std::vector<int> np = align_side_counts(side_counts, match.rotation, match.reversed);
  for (int i = 0; i < m; ++i) {
    long long acc = 0;
    for (int j = 0; j < c; ++j) acc += (long long)p.weight[i][j] * match.s[j];
    if (acc != np[i])
      throw std::invalid_argument(
          "instantiate_pattern: subdivisions do not reproduce the side counts");
  }

  // Chord of each undirected coarse edge.
  std::map<std::pair<int, int>, int> chord_of;
  for (int q = 0; q < int(p.quads.size()); ++q)
    for (int k = 0; k < 4; ++k) {
      int u = p.quads[q][k], v = p.quads[q][(k + 1) % 4];
      chord_of[{std::min(u, v), std::max(u, v)}] = p.edge_chord[4 * q + k];
    }

  QuadMesh mesh;
  mesh.points.reserve(size_t(b) + 16);
  // Vertex keys: {0,v,0,0} coarse corner v; {1,lo,hi,step} point on coarse
  // edge (lo,hi), step counted from lo; {2,q,i,j} interior of coarse quad q.
  std::map<std::array<int, 4>, int> vid;
  auto vertex = [&](const std::array<int, 4>& key, const Vec2& pos) {
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    int id = int(mesh.points.size());
    mesh.points.push_back(pos);
    vid.emplace(key, id);
    return id;
  };
  auto edge_key = [](int u, int v, int step, int sj) -> std::array<int, 4> {
    if (u <= v) return {1, u, v, step};
    return {1, v, u, sj - step};
  };

  // Boundary first: ids 0..b-1 in pattern boundary order, positions taken
  // from the aligned cavity chain.
  int t = 0;
  for (int i = 0; i < m; ++i)
    for (size_t u = 0; u + 1 < p.sides[i].size(); ++u) {
      int a = p.sides[i][u], bb = p.sides[i][u + 1];
      int sj = match.s[chord_of.at({std::min(a, bb), std::max(a, bb)})];
      vertex({0, a, 0, 0}, chain[aligned_chain_index(match, side_counts, t)]);
      ++t;
      for (int step = 1; step < sj; ++step) {
        vertex(edge_key(a, bb, step, sj),
               chain[aligned_chain_index(match, side_counts, t)]);
        ++t;
      }
    }
  if (t != int(b) || int(mesh.points.size()) != int(b))
    throw std::invalid_argument(
        "instantiate_pattern: side counts disagree with the subdivision");

  // Coarse interior points sit at the Laplace balance of the mapped corners.
  std::vector<char> on_boundary(p.points.size(), 0);
  for (int i = 0; i < m; ++i)
    for (size_t u = 0; u + 1 < p.sides[i].size(); ++u) on_boundary[p.sides[i][u]] = 1;
  std::vector<Vec2> coarse_pos = p.points;
  {
    QuadMesh cm;
    cm.points = p.points;
    for (int v = 0; v < int(p.points.size()); ++v)
      if (on_boundary[v]) cm.points[v] = mesh.points[vid.at({0, v, 0, 0})];
    cm.labels.assign(p.points.size(), VertexLabel{});
    cm.quads = p.quads;
    cm.build_connectivity();
    std::vector<int> interior;
    for (int v = 0; v < int(p.points.size()); ++v)
      if (!on_boundary[v]) interior.push_back(v);
    if (!interior.empty()) {
      std::vector<Vec2> sol = laplacian_solve(cm, interior);
      for (size_t k = 0; k < interior.size(); ++k) cm.points[interior[k]] = sol[k];
    }
    coarse_pos = cm.points;
  }

  // Refine every coarse quad into an su x sv bilinear grid; shared keys make
  // neighbouring grids stitch exactly.
  for (int q = 0; q < int(p.quads.size()); ++q) {
    int va = p.quads[q][0], vb = p.quads[q][1], vc = p.quads[q][2], vd = p.quads[q][3];
    int su = match.s[p.edge_chord[4 * q + 0]];
    int sv = match.s[p.edge_chord[4 * q + 1]];
    const Vec2 &pa = coarse_pos[va], &pb = coarse_pos[vb];
    const Vec2 &pc = coarse_pos[vc], &pd = coarse_pos[vd];
    std::vector<std::vector<int>> grid(su + 1, std::vector<int>(sv + 1, -1));
    for (int i = 0; i <= su; ++i)
      for (int j = 0; j <= sv; ++j) {
        double u = double(i) / su, v = double(j) / sv;
        Vec2 pos = (1 - v) * ((1 - u) * pa + u * pb) + v * ((1 - u) * pd + u * pc);
        std::array<int, 4> key;
        if (i == 0 && j == 0)
          key = {0, va, 0, 0};
        else if (i == su && j == 0)
          key = {0, vb, 0, 0};
        else if (i == su && j == sv)
          key = {0, vc, 0, 0};
        else if (i == 0 && j == sv)
          key = {0, vd, 0, 0};
        else if (j == 0)
          key = edge_key(va, vb, i, su);
        else if (j == sv)
          key = edge_key(vd, vc, i, su);
        else if (i == 0)
          key = edge_key(va, vd, j, sv);
        else if (i == su)
          key = edge_key(vb, vc, j, sv);
        else
          key = {2, q, i, j};
        grid[i][j] = vertex(key, pos);
      }
    for (int i = 0; i < su; ++i)
      for (int j = 0; j < sv; ++j)
        mesh.quads.push_back({grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
  }

  // A reversed alignment maps the pattern mirrored; flipping each quad
  // restores CCW orientation.
  if (match.reversed)
    for (auto& q : mesh.quads) std::swap(q[1], q[3]);

  mesh.labels.assign(mesh.points.size(), VertexLabel{});
  mesh.build_connectivity();
  require_census(mesh, "instantiate_pattern");

  if (smooth) {
    std::vector<int> interior;
    for (int v = int(b); v < int(mesh.points.size()); ++v) interior.push_back(v);
    if (!interior.empty()) smooth_loop(mesh, interior);
  }
  return mesh;
}

std::optional<QuadMesh> premesh_simple_face(const PlanarModel& model, int face,
                                            const CurveQuantization& q,
                                            const PatternCatalogue& cat,
                                            const PremeshOptions& opt) {
  if (q.count.size() != model.curves.size() || q.placed.size() != model.curves.size())
    throw std::invalid_argument("premesh_simple_face: quantization does not match the model");
  std::vector<FaceLoop> loops = face_loops(model, face);
  if (loops.size() != 1) return std::nullopt;
  const FaceLoop& loop = loops[0];
  int steps = int(loop.size());

  // Cavity chain: each loop step contributes its start corner, then the
  // placed interior points of its curve in traversal order.
  std::vector<Vec2> chain;
  std::vector<VertexLabel> chain_labels;
  std::vector<int> step_start(steps, 0);
  for (int i = 0; i < steps; ++i) {
    const CurveRef& cr = loop[i];
    const CurvePlacement& pl = q.placed[cr.curve];
    if (int(pl.points.size()) != q.count[cr.curve] - 1)
      throw std::invalid_argument(
          "premesh_simple_face: placement does not match the edge count on curve " +
          std::to_string(cr.curve));
    step_start[i] = int(chain.size());
    int corner = cr.first_corner(model);
    chain.push_back(model.corners[corner]);
    chain_labels.push_back(VertexLabel{VertexClass::Corner, corner});
    if (cr.forward) {
      for (const Vec2& pt : pl.points) {
        chain.push_back(pt);
        chain_labels.push_back(VertexLabel{VertexClass::OnCurve, cr.curve});
      }
    } else {
      for (auto it = pl.points.rbegin(); it != pl.points.rend(); ++it) {
        chain.push_back(*it);
        chain_labels.push_back(VertexLabel{VertexClass::OnCurve, cr.curve});
      }
    }
  }
  int b = int(chain.size());

  // Quarter-turn count per corner decides its role: 1 starts a pattern
  // side, 2 lies inside one, 3+ leaves the catalogue.
  std::vector<double> angles = loop_corner_angles(model, loop);
  std::vector<int> quarters(steps, 1);
  int convex = 0;
  for (int i = 0; i < steps; ++i) {
    int nq = std::max(1, int(std::lround(angles[i] / (M_PI / 2))));
    if (nq >= 3) return std::nullopt;
    quarters[i] = nq;
    if (nq == 1) ++convex;
  }
  if (convex == 0) return std::nullopt;
  int i0 = 0;
  while (quarters[i0] != 1) ++i0;

  // Start the chain at a convex corner and split it there into sides.
  std::vector<Vec2> rchain(b);
  std::vector<VertexLabel> rlabels(b);
  int shift = step_start[i0];
  for (int t = 0; t < b; ++t) {
    rchain[t] = chain[(shift + t) % b];
    rlabels[t] = chain_labels[(shift + t) % b];
  }
  std::vector<int> side_counts;
  int acc = 0;
  for (int k = 0; k < steps; ++k) {
    int i = (i0 + k) % steps;
    if (k > 0 && quarters[i] == 1) {
      side_counts.push_back(acc);
      acc = 0;
    }
    acc += q.count[loop[i].curve];
  }
  side_counts.push_back(acc);

  for (const Pattern& p : cat.patterns) {
    if (p.sides.size() != side_counts.size()) continue;
    std::optional<PatternMatch> mm = match_pattern(p, side_counts);
    if (!mm) continue;
    QuadMesh mesh = instantiate_pattern(p, *mm, rchain, side_counts, true);
    for (int t = 0; t < b; ++t)
      mesh.labels[t] = rlabels[aligned_chain_index(*mm, side_counts, t)];
    for (int v = b; v < int(mesh.points.size()); ++v)
      mesh.labels[v] = VertexLabel{VertexClass::Interior, face};
    if (mesh_quality(mesh).min_sicn >= opt.min_quality) return mesh;
  }
  return std::nullopt;
}

}  // namespace quasiquad
