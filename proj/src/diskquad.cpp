#include "quasiquad/diskquad.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "quasiquad/geometry.hpp"
#include "quasiquad/smoothing.hpp"

namespace quasiquad {

void DiskQuadrangulation::recount() {
  n_in.assign(b, 0);
  interior_valence.assign(i, 0);
  for (const auto& q : quads)
    for (int v : q) {
      if (v < b)
        ++n_in[v];
      else
        ++interior_valence[v - b];
    }
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// quads on each undirected edge; second slot -1 until a twin shows up
std::map<EdgeKey, std::array<int, 2>> edge_quads(const DiskQuadrangulation& d) {
  std::map<EdgeKey, std::array<int, 2>> eq;
  for (int q = 0; q < (int)d.quads.size(); ++q)
    for (int x = 0; x < 4; ++x) {
      auto key = edge_key(d.quads[q][x], d.quads[q][(x + 1) % 4]);
      auto [it, fresh] = eq.try_emplace(key, std::array<int, 2>{q, -1});
      if (!fresh) {
        if (it->second[1] >= 0)
          throw std::invalid_argument("vertex pair spans more than one edge");
        it->second[1] = q;
      }
    }
  return eq;
}

// One dihedral alignment: boundary vertex v takes label
// refl ? (rot - v) mod b : (rot + v) mod b, then quads are walked breadth
// first from the one on labeled boundary edge (0,1), each quad emitting its
// corners from its smallest labeled corner (backwards when reflected), with
// interior vertices labeled in first-encounter order. The emitted byte
// string identifies the quadrangulation up to that alignment. Returns the
// string when it beats `best` lexicographically, else empty; comparison
// aborts mid-walk on the first losing byte.
std::string emit_alignment(const DiskQuadrangulation& d,
                           const std::map<EdgeKey, std::array<int, 2>>& eq, int rot,
                           bool refl, const std::string& best) {
  const int nq = (int)d.quads.size();
  std::vector<int> lab(d.vertex_count(), -1);
  for (int v = 0; v < d.b; ++v)
    lab[v] = refl ? ((rot - v) % d.b + d.b) % d.b : (v + rot) % d.b;
  int next = d.b;

  int v0, v1;  // original boundary edge taking labels (0,1)
  if (refl) {
    v0 = rot % d.b;
    v1 = (v0 + d.b - 1) % d.b;
  } else {
    v0 = (d.b - rot) % d.b;
    v1 = (v0 + 1) % d.b;
  }

  std::string out;
  out.reserve(4 * nq);
  bool lower = best.empty();
  auto push = [&](int label) {
    if (!lower) {
      char c = (char)label;
      if (c > best[out.size()]) return false;
      if (c < best[out.size()]) lower = true;
    }
    out.push_back((char)label);
    return true;
  };

  std::vector<char> seen(nq, 0);
  std::deque<int> fifo;
  int start = eq.at(edge_key(v0, v1))[0];
  fifo.push_back(start);
  seen[start] = 1;
  const int step = refl ? 3 : 1;
  while (!fifo.empty()) {
    int q = fifo.front();
    fifo.pop_front();
    const auto& quad = d.quads[q];
    int k0 = 0, k0lab = INT_MAX;
    for (int k = 0; k < 4; ++k) {
      int l = lab[quad[k]];
      if (l >= 0 && l < k0lab) {
        k0lab = l;
        k0 = k;
      }
    }
    std::array<int, 4> order;
    for (int t = 0; t < 4; ++t) order[t] = quad[(k0 + step * t) % 4];
    for (int v : order) {
      if (lab[v] < 0) lab[v] = next++;
      if (!push(lab[v])) return {};
    }
    for (int t = 0; t < 4; ++t) {
      const auto& side = eq.at(edge_key(order[t], order[(t + 1) % 4]));
      int other = side[0] == q ? side[1] : side[0];
      if (other >= 0 && !seen[other]) {
        seen[other] = 1;
        fifo.push_back(other);
      }
    }
  }
  if ((int)out.size() != 4 * nq)
    throw std::invalid_argument("disk quadrangulation is not edge connected");
  return lower ? out : std::string{};
}

DiskQuadrangulation decode_form(const std::string& s) {
  DiskQuadrangulation d;
  d.b = (unsigned char)s[0];
  d.i = (unsigned char)s[1];
  for (size_t p = 2; p + 3 < s.size(); p += 4)
    d.quads.push_back({(int)(unsigned char)s[p], (int)(unsigned char)s[p + 1],
                       (int)(unsigned char)s[p + 2], (int)(unsigned char)s[p + 3]});
  d.recount();
  return d;
}

bool filter_ok(const DiskQuadrangulation& d) {
  for (int v : d.n_in)
    if (v < 1 || v > 3) return false;
  for (int v : d.interior_valence)
    if (v < 3 || v > 5) return false;
  return true;
}

}  // namespace

std::string canonical_form(const DiskQuadrangulation& d) {
  if (d.quads.empty()) throw std::invalid_argument("empty disk quadrangulation");
  auto eq = edge_quads(d);
  std::string best;
  for (int refl = 0; refl < 2; ++refl)
    for (int rot = 0; rot < d.b; ++rot) {
      std::string s = emit_alignment(d, eq, rot, refl != 0, best);
      if (!s.empty()) best = std::move(s);
    }
  std::string out;
  out.push_back((char)d.b);
  out.push_back((char)d.i);
  out += best;
  return out;
}

DiskQuadrangulation canonical_representative(const DiskQuadrangulation& d) {
  return decode_form(canonical_form(d));
}

const std::vector<DiskQuadrangulation>* DiskQuadTable::find(int b, int i) const {
  auto it = entries.find({b, i});
  return it == entries.end() ? nullptr : &it->second;
}

int DiskQuadTable::total_count() const {
  int n = 0;
  for (const auto& [key, vec] : entries) n += (int)vec.size();
  return n;
}

DiskQuadTable enumerate_disk_quadrangulations(int b_max, int i_max, bool filtered) {
  const int q_max = (b_max + 2 * i_max - 2) / 2;
  std::map<std::pair<int, int>, std::map<std::string, DiskQuadrangulation>> found;
  std::set<std::string> visited;
  std::deque<std::pair<std::string, DiskQuadrangulation>> fifo;

  auto admit = [&](DiskQuadrangulation&& nd) {
    std::string s = canonical_form(nd);
    if (!visited.insert(s).second) return;
    DiskQuadrangulation rep = decode_form(s);
    fifo.emplace_back(std::move(s), std::move(rep));
  };

  DiskQuadrangulation cell;
  cell.b = 4;
  cell.i = 0;
  cell.quads = {{0, 1, 2, 3}};
  cell.recount();
  admit(std::move(cell));

  while (!fifo.empty()) {
    auto [form, d] = std::move(fifo.front());
    fifo.pop_front();

    if (d.b <= b_max && (!filtered || filter_ok(d)))
      found[{d.b, d.i}].emplace(std::move(form), d);
    if ((int)d.quads.size() >= q_max) continue;

    const int b = d.b;
    std::set<EdgeKey> eset;
    for (const auto& q : d.quads)
      for (int x = 0; x < 4; ++x) eset.insert(edge_key(q[x], q[(x + 1) % 4]));

    for (int e = 0; e < b; ++e) {
      const int u = e, w = (e + 1) % b;

      // new quad over boundary edge (e, e+1); two fresh boundary vertices
      if (!filtered || (d.n_in[u] + 1 <= 4 && d.n_in[w] + 1 <= 4)) {
        DiskQuadrangulation nd;
        nd.b = b + 2;
        nd.i = d.i;
        auto map1 = [&](int v) { return v <= e ? v : v + 2; };
        for (auto q : d.quads) {
          for (auto& x : q) x = map1(x);
          nd.quads.push_back(q);
        }
        nd.quads.push_back({map1(w), u, e + 1, e + 2});
        nd.recount();
        admit(std::move(nd));
      }

      // new quad over edges (e-1,e) and (e,e+1); e turns interior, one fresh
      // boundary vertex takes its place on the cycle
      if (d.i + 1 <= i_max) {
        const int prev = (e + b - 1) % b;
        bool ok = true;
        if (filtered) {
          int fv = d.n_in[e] + 1;  // interior valence of e, frozen from here on
          ok = fv >= 3 && fv <= 5 && d.n_in[prev] + 1 <= 4 && d.n_in[w] + 1 <= 4;
        }
        if (ok) {
          DiskQuadrangulation nd;
          nd.b = b;
          nd.i = d.i + 1;
          const int sunk = b + d.i;
          auto map2 = [&](int v) { return v == e ? sunk : v; };
          for (auto q : d.quads) {
            for (auto& x : q) x = map2(x);
            nd.quads.push_back(q);
          }
          nd.quads.push_back({w, sunk, prev, e});
          nd.recount();
          admit(std::move(nd));
        }
      }

      // new quad over three consecutive boundary edges; e and e+1 turn
      // interior. Skipped when the closing vertex pair already spans an
      // edge, which would double it.
      if (b >= 6 && d.i + 2 <= i_max) {
        const int prev = (e + b - 1) % b, after = (e + 2) % b;
        bool ok = true;
        if (filtered) {
          int f1 = d.n_in[e] + 1, f2 = d.n_in[w] + 1;
          ok = f1 >= 3 && f1 <= 5 && f2 >= 3 && f2 <= 5 && d.n_in[prev] + 1 <= 4 &&
               d.n_in[after] + 1 <= 4;
        }
        if (ok && !eset.count(edge_key(prev, after))) {
          DiskQuadrangulation nd;
          nd.b = b - 2;
          nd.i = d.i + 2;
          std::vector<int> map3(d.vertex_count());
          for (int t = 0; t < b - 2; ++t) map3[(after + t) % b] = t;
          for (int t = 0; t < d.i; ++t) map3[b + t] = b - 2 + t;
          map3[e] = b - 2 + d.i;
          map3[w] = b - 2 + d.i + 1;
          for (auto q : d.quads) {
            for (auto& x : q) x = map3[x];
            nd.quads.push_back(q);
          }
          nd.quads.push_back({map3[after], map3[w], map3[e], map3[prev]});
          nd.recount();
          admit(std::move(nd));
        }
      }
    }
  }

  DiskQuadTable table;
  for (auto& [key, bucket] : found)
    for (auto& [form, d] : bucket) table.entries[key].push_back(std::move(d));
  return table;
}

void save_disk_table(const DiskQuadTable& table, const std::string& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, vec] : table.entries)
    for (const auto& d : vec) {
      nlohmann::json quads = nlohmann::json::array();
      for (const auto& q : d.quads) quads.push_back({q[0], q[1], q[2], q[3]});
      entries.push_back({{"b", d.b}, {"i", d.i}, {"quads", std::move(quads)}});
    }
  nlohmann::json root{{"version", 1}, {"entries", std::move(entries)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write disk table: " + path);
  out << root.dump(1) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("cannot write disk table: " + path);
}

DiskQuadTable load_disk_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open disk table: " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot parse disk table " + path + ": " + e.what());
  }
  DiskQuadTable table;
  try {
    for (const auto& entry : root.at("entries")) {
      DiskQuadrangulation d;
      d.b = entry.at("b").get<int>();
      d.i = entry.at("i").get<int>();
      if (d.b < 4 || d.i < 0)
        throw std::runtime_error("disk table " + path + " is malformed");
      for (const auto& q : entry.at("quads")) {
        std::array<int, 4> t{q.at(0).get<int>(), q.at(1).get<int>(), q.at(2).get<int>(),
                             q.at(3).get<int>()};
        for (int v : t)
          if (v < 0 || v >= d.vertex_count())
            throw std::runtime_error("disk table " + path + " is malformed");
        d.quads.push_back(t);
      }
      d.recount();
      table.entries[{d.b, d.i}].push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("disk table " + path + " is malformed: " + e.what());
  }
  return table;
}

const DiskQuadTable& builtin_disk_table() {
  static const DiskQuadTable table =
      load_disk_table(std::string(QUASIQUAD_DATA_DIR) + "/disk_table.json");
  return table;
}

std::vector<int> default_ideal_valences(const QuadMesh& m) {
  std::vector<int> ideal(m.points.size(), 4);
  for (int v = 0; v < (int)m.points.size(); ++v) {
    switch (m.labels[v].cls) {
      case VertexClass::Interior:
        break;
      case VertexClass::OnCurve:
        ideal[v] = 2;
        break;
      case VertexClass::Corner: {
        // quarter turns covered by the incident wedges
        double total = 0.0;
        for (int q : m.vertex_quad_ring(v)) {
          const auto& quad = m.quads[q];
          int k = 0;
          while (quad[k] != v) ++k;
          Vec2 to_next = m.points[quad[(k + 1) % 4]] - m.points[v];
          Vec2 to_prev = m.points[quad[(k + 3) % 4]] - m.points[v];
          double a = angle_between(to_next, to_prev);
          if (a <= 0.0) a += 2.0 * M_PI;
          total += a;
        }
        ideal[v] = std::clamp((int)std::lround(total / (M_PI / 2.0)), 1, 4);
        break;
      }
    }
  }
  return ideal;
}

bool is_defect_vertex(const QuadMesh& m, int v, const std::vector<int>& ideal) {
  int val = m.valence(v);
  if (val == 0) return false;
  if (m.labels[v].cls == VertexClass::Interior) return val < 3 || val > 5;
  return val != ideal[v];
}

std::vector<int> defect_vertices(const QuadMesh& m, const std::vector<int>& ideal) {
  std::vector<int> out;
  for (VertexClass cls : {VertexClass::Corner, VertexClass::OnCurve, VertexClass::Interior})
    for (int v = 0; v < (int)m.points.size(); ++v)
      if (m.labels[v].cls == cls && is_defect_vertex(m, v, ideal)) out.push_back(v);
  return out;
}

RepairResult repair_defect(QuadMesh& m, int seed, const DiskQuadTable& table,
                           const std::vector<int>& ideal_valence, const PlanarModel* model) {
  std::vector<int> cavity = m.vertex_quad_ring(seed);
  if (cavity.empty()) return {false, "seed has no incident quads"};
  std::sort(cavity.begin(), cavity.end());
  std::vector<char> in_cavity(m.quads.size(), 0);
  for (int q : cavity) in_cavity[q] = 1;

  // boundary of the cavity as a single directed cycle
  std::map<int, int> cycle_next;
  for (int q : cavity)
    for (int k = 0; k < 4; ++k) {
      int he = 4 * q + k;
      int tw = m.twin[he];
      if (tw >= 0 && in_cavity[QuadMesh::he_quad(tw)]) continue;
      if (!cycle_next.emplace(m.he_from(he), m.he_to(he)).second)
        return {false, "cavity boundary is pinched"};
    }
  std::vector<int> cycle{cycle_next.begin()->first};
  while (true) {
    auto it = cycle_next.find(cycle.back());
    if (it == cycle_next.end()) return {false, "cavity boundary is pinched"};
    if (it->second == cycle.front()) break;
    cycle.push_back(it->second);
    if (cycle.size() > cycle_next.size()) return {false, "cavity boundary is pinched"};
  }
  if (cycle.size() != cycle_next.size()) return {false, "cavity boundary is pinched"};
  const int b = (int)cycle.size();

  std::vector<int> pos_of(m.points.size(), -1);
  for (int p = 0; p < b; ++p) pos_of[cycle[p]] = p;
  std::vector<int> inside;
  for (int q : cavity)
    for (int v : m.quads[q])
      if (pos_of[v] < 0) inside.push_back(v);
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
  for (int v : inside)
    if (m.labels[v].cls != VertexClass::Interior)
      return {false, "cavity would swallow a boundary vertex"};

  std::vector<int> n_in(b, 0), n_out(b);
  for (int q : cavity)
    for (int v : m.quads[q])
      if (pos_of[v] >= 0) ++n_in[pos_of[v]];
  for (int p = 0; p < b; ++p) n_out[p] = m.valence(cycle[p]) - n_in[p];

  auto sq = [](long long x) { return x * x; };
  long long cur_dev = 0;
  for (int p = 0; p < b; ++p)
    cur_dev += sq(ideal_valence[cycle[p]] - (n_in[p] + n_out[p]));
  for (int v : inside) cur_dev += sq(ideal_valence[v] - m.valence(v));

  std::vector<int> kind(b);  // 0 corner, 1 curve, 2 interior
  for (int p = 0; p < b; ++p)
    kind[p] = m.labels[cycle[p]].cls == VertexClass::Corner    ? 0
              : m.labels[cycle[p]].cls == VertexClass::OnCurve ? 1
                                                               : 2;

  // Replacement search over all table entries with matching boundary length
  // and all 2b alignments, minimizing summed squared valence deviation, then
  // vertex count, first hit winning ties. Vertex classes impose hard totals:
  // corners and curve vertices must land exactly on their ideal, interior
  // ones inside [3,5]. When no candidate fits, constraints come off one
  // class at a time, interior range first, corner targets last.
  struct Pick {
    const DiskQuadrangulation* entry = nullptr;
    int rot = 0;
    bool refl = false;
    long long dev = 0;
    int verts = 0;
  };
  Pick best;
  for (int level = 0; level < 4 && !best.entry; ++level) {
    for (const auto& [key, vec] : table.entries) {
      if (key.first != b) continue;
      for (const auto& entry : vec) {
        long long base = 0;
        for (int val : entry.interior_valence) base += sq(4 - val);
        for (int refl = 0; refl < 2; ++refl)
          for (int rot = 0; rot < b; ++rot) {
            long long dev = base;
            bool ok = true;
            for (int j = 0; j < b && ok; ++j) {
              int p = refl ? ((rot - j) % b + b) % b : (rot + j) % b;
              int tot = n_out[p] + entry.n_in[j];
              int want = ideal_valence[cycle[p]];
              switch (kind[p]) {
                case 0: ok = level >= 3 || tot == want; break;
                case 1: ok = level >= 2 || tot == want; break;
                default: ok = level >= 1 || (tot >= 3 && tot <= 5); break;
              }
              dev += sq(want - tot);
            }
            if (!ok) continue;
            int verts = b + entry.i;
            if (!best.entry || dev < best.dev || (dev == best.dev && verts < best.verts))
              best = {&entry, rot, refl != 0, dev, verts};
          }
      }
    }
  }
  if (!best.entry) return {false, "no replacement fits the cavity"};
  if (!(best.dev < cur_dev ||
        (best.dev == cur_dev && best.verts < b + (int)inside.size())))
    return {false, "no strictly better replacement"};

  QuadMesh snapshot = m;
  const DiskQuadrangulation& rep = *best.entry;

  std::vector<int> mv(rep.vertex_count());
  for (int j = 0; j < b; ++j) {
    int p = best.refl ? ((best.rot - j) % b + b) % b : (best.rot + j) % b;
    mv[j] = cycle[p];
  }
  int interior_id = -1;
  for (int v : inside) {
    interior_id = m.labels[v].id;
    break;
  }
  for (int p = 0; p < b && interior_id < 0; ++p)
    if (m.labels[cycle[p]].cls == VertexClass::Interior) interior_id = m.labels[cycle[p]].id;
  Vec2 centroid(0.0, 0.0);
  for (int p = 0; p < b; ++p) centroid += m.points[cycle[p]];
  centroid /= (double)b;
  std::vector<int> fresh;
  for (int t = 0; t < rep.i; ++t) {
    mv[b + t] = (int)m.points.size();
    fresh.push_back((int)m.points.size());
    m.points.push_back(centroid);
    m.labels.push_back({VertexClass::Interior, interior_id});
  }

  std::vector<std::array<int, 4>> new_quads;
  new_quads.reserve(m.quads.size() - cavity.size() + rep.quads.size());
  for (int q = 0; q < (int)m.quads.size(); ++q)
    if (!in_cavity[q]) new_quads.push_back(m.quads[q]);
  for (const auto& t : rep.quads) {
    std::array<int, 4> quad{mv[t[0]], mv[t[1]], mv[t[2]], mv[t[3]]};
    if (best.refl) std::reverse(quad.begin(), quad.end());
    new_quads.push_back(quad);
  }
  m.quads = std::move(new_quads);

  if (!inside.empty()) {
    std::vector<int> remap(m.points.size(), -1);
    int w = 0;
    size_t drop = 0;
    for (int v = 0; v < (int)m.points.size(); ++v) {
      if (drop < inside.size() && inside[drop] == v) {
        ++drop;
        continue;
      }
      if (w != v) {
        m.points[w] = m.points[v];
        m.labels[w] = m.labels[v];
      }
      remap[v] = w++;
    }
    m.points.resize(w);
    m.labels.resize(w);
    for (auto& q : m.quads)
      for (auto& v : q) v = remap[v];
    for (auto& v : fresh) v = remap[v];
    for (auto& v : cycle) v = remap[v];
  }

  try {
    m.build_connectivity();
    require_census(m, "defect repair");
  } catch (const std::exception&) {
    m = snapshot;
    return {false, "replacement broke the mesh"};
  }

  bool geom_ok = true;
  try {
    if (!fresh.empty()) {
      auto placed = laplacian_solve(m, fresh);
      for (size_t t = 0; t < fresh.size(); ++t) m.points[fresh[t]] = placed[t];
    }
    std::vector<int> around = cycle;
    around.insert(around.end(), fresh.begin(), fresh.end());
    std::vector<int> enlarged = adjacent_quads(m, around);
    std::vector<char> in_enlarged(m.quads.size(), 0);
    for (int q : enlarged) in_enlarged[q] = 1;
    std::vector<int> free_verts;
    for (int v = 0; v < (int)m.points.size(); ++v) {
      if (m.labels[v].cls != VertexClass::Interior || m.boundary_vertex(v)) continue;
      auto ring = m.vertex_quad_ring(v);
      if (ring.empty()) continue;
      bool all_in = true;
      for (int q : ring) all_in = all_in && in_enlarged[q];
      if (all_in) free_verts.push_back(v);
    }
    if (quality_over(m, enlarged).min_sicn <= 0.0 && free_verts.size() <= 50)
      untangle_local(m, enlarged, free_verts);
    smooth_loop(m, free_verts, model);
    if (quality_over(m, enlarged).min_sicn <= 0.0 && free_verts.size() <= 50)
      untangle_local(m, enlarged, free_verts);
    geom_ok = quality_over(m, enlarged).min_sicn > 0.0;
  } catch (const std::exception&) {
    geom_ok = false;
  }
  if (!geom_ok) {
    m = snapshot;
    return {false, "replacement leaves tangled quads"};
  }
  return {true, "replaced " + std::to_string(cavity.size()) + " quads with a (" +
                    std::to_string(b) + "," + std::to_string(rep.i) + ") patch"};
}

}  // namespace quasiquad
