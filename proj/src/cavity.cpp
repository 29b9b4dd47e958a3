#include "quasiquad/cavity.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quasiquad {

Cavity extract_cavity(const QuadMesh& m, const std::vector<int>& quads) {
  Cavity c;
  c.quads = quads;
  std::sort(c.quads.begin(), c.quads.end());
  c.quads.erase(std::unique(c.quads.begin(), c.quads.end()), c.quads.end());
  if (c.quads.empty()) throw std::invalid_argument("cavity needs at least one quad");
  if (c.quads.front() < 0 || c.quads.back() >= (int)m.quads.size())
    throw std::invalid_argument("cavity quad id out of range");

  std::vector<char> in_cavity(m.quads.size(), 0);
  for (int q : c.quads) in_cavity[q] = 1;

  // directed boundary edges; a vertex with two outgoing ones is pinched
  std::map<int, int> cycle_next;
  for (int q : c.quads)
    for (int k = 0; k < 4; ++k) {
      int he = 4 * q + k;
      int tw = m.twin[he];
      if (tw >= 0 && in_cavity[QuadMesh::he_quad(tw)]) continue;
      if (!cycle_next.emplace(m.he_from(he), m.he_to(he)).second)
        throw std::invalid_argument("cavity boundary is pinched");
    }
  std::vector<int> cycle{cycle_next.begin()->first};
  while (true) {
    auto it = cycle_next.find(cycle.back());
    if (it == cycle_next.end() || cycle.size() > cycle_next.size())
      throw std::invalid_argument("cavity boundary is not a single cycle");
    if (it->second == cycle.front()) break;
    cycle.push_back(it->second);
  }
  if (cycle.size() != cycle_next.size())
    throw std::invalid_argument("cavity boundary is not a single cycle");
  const int B = (int)cycle.size();

  std::vector<int> cnt(m.points.size(), 0);
  for (int q : c.quads)
    for (int v : m.quads[q]) ++cnt[v];

  // start at the smallest corner vertex, or the smallest vertex when the
  // boundary has no corner at all
  int start = 0;
  bool corner = false;
  for (int p = 0; p < B; ++p) {
    bool pc = cnt[cycle[p]] == 1;
    if ((pc && !corner) || (pc == corner && cycle[p] < cycle[start])) {
      start = p;
      corner = pc;
    }
  }
  std::rotate(cycle.begin(), cycle.begin() + start, cycle.end());

  c.boundary = cycle;
  c.n_in.resize(B);
  c.n_out.resize(B);
  for (int p = 0; p < B; ++p) {
    c.n_in[p] = cnt[cycle[p]];
    c.n_out[p] = m.valence(cycle[p]) - c.n_in[p];
    if (c.n_in[p] == 1) c.corners.push_back(p);
    if (m.labels[cycle[p]].cls == VertexClass::Interior && c.n_out[p] == 1) c.concave.push_back(p);
  }

  std::vector<int> touched;
  for (int q : c.quads)
    for (int v : m.quads[q]) touched.push_back(v);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (int v : touched)
    if (!cycle_next.count(v)) c.interior.push_back(v);

  if (c.corners.empty()) {
    c.sides = {B};
  } else {
    for (size_t j = 0; j < c.corners.size(); ++j) {
      int next = j + 1 < c.corners.size() ? c.corners[j + 1] : B;
      c.sides.push_back(next - c.corners[j]);
    }
  }
  return c;
}

std::vector<Cavity> grow_cavity(const QuadMesh& m, const std::vector<int>& seed,
                                const GrowthRules& rules) {
  std::vector<Cavity> out;
  std::vector<int> quads = seed;
  std::sort(quads.begin(), quads.end());
  quads.erase(std::unique(quads.begin(), quads.end()), quads.end());
  if (quads.empty() || quads.front() < 0 || quads.back() >= (int)m.quads.size()) return out;
  try {
    (void)extract_cavity(m, quads);
  } catch (const std::invalid_argument&) {
    return out;
  }

  std::vector<char> in_cavity(m.quads.size(), 0), refused(m.quads.size(), 0),
      queued(m.quads.size(), 0);
  std::vector<int> cnt(m.points.size(), 0);
  std::vector<char> preserved(m.points.size(), 0), open_interior(m.points.size(), 0);
  for (int v : rules.preserved)
    if (v >= 0 && v < (int)m.points.size()) preserved[v] = 1;
  for (int v : rules.allow_interior)
    if (v >= 0 && v < (int)m.points.size()) open_interior[v] = 1;

  auto protected_vert = [&](int v) {
    return m.labels[v].cls != VertexClass::Interior || (preserved[v] && !open_interior[v]);
  };

  std::set<int> concave;
  std::deque<int> frontier;
  int absorbed_irr = 0;  // irregular vertices fully inside the set
  int bad = 0;           // protected vertices past two inside quads

  for (int q : quads) in_cavity[q] = 1;
  for (int q : quads)
    for (int v : m.quads[q]) ++cnt[v];
  for (int v = 0; v < (int)m.points.size(); ++v) {
    if (cnt[v] == 0) continue;
    if (cnt[v] >= 3 && protected_vert(v)) ++bad;
    if (m.labels[v].cls != VertexClass::Interior) continue;
    int val = m.valence(v);
    if (cnt[v] == val) {
      if (val != 4) ++absorbed_irr;
    } else if (cnt[v] == val - 1) {
      concave.insert(v);
    }
  }

  auto push_neighbors = [&](int q) {
    for (int k = 0; k < 4; ++k) {
      int tw = m.twin[4 * q + k];
      if (tw < 0) continue;
      int nq = QuadMesh::he_quad(tw);
      if (!in_cavity[nq] && !queued[nq] && !refused[nq]) {
        queued[nq] = 1;
        frontier.push_back(nq);
      }
    }
  };
  for (int q : quads) push_neighbors(q);

  // 0 added, 1 deferred for later (a neighbor may re-open it), 2 refused
  auto add_quad = [&](int q) -> int {
    std::array<char, 4> shared{}, touch{};
    int runs = 0, edges = 0;
    for (int k = 0; k < 4; ++k) {
      int tw = m.twin[4 * q + k];
      shared[k] = tw >= 0 && in_cavity[QuadMesh::he_quad(tw)];
      edges += shared[k];
      touch[k] = cnt[m.quads[q][k]] > 0;
    }
    if (edges == 0 || edges == 4) return 1;
    for (int k = 0; k < 4; ++k) runs += shared[k] != shared[(k + 1) % 4];
    if (runs != 2) return 1;  // two separate shared runs
    for (int k = 0; k < 4; ++k) {
      bool span = shared[k] || shared[(k + 3) % 4];
      if (touch[k] && !span) return 1;  // gluing would close a pocket
    }
    for (int k = 0; k < 4; ++k) {
      int v = m.quads[q][k];
      if (preserved[v] && !open_interior[v] && m.labels[v].cls == VertexClass::Interior &&
          cnt[v] + 1 == m.valence(v))
        return 2;  // would swallow a preserved vertex
    }
    in_cavity[q] = 1;
    quads.push_back(q);
    for (int k = 0; k < 4; ++k) {
      int v = m.quads[q][k];
      ++cnt[v];
      if (cnt[v] == 3 && protected_vert(v)) ++bad;
      if (m.labels[v].cls != VertexClass::Interior) continue;
      int val = m.valence(v);
      if (cnt[v] == val) {
        concave.erase(v);
        if (val != 4) ++absorbed_irr;
      } else if (cnt[v] == val - 1) {
        concave.insert(v);
      }
    }
    push_neighbors(q);
    return 0;
  };

  int emitted_irr = -1;
  while (true) {
    // absorb the exterior quad at the smallest concave vertex until convex
    bool stuck = false;
    while (!concave.empty() && !stuck) {
      int v = *concave.begin();
      int fix = -1;
      for (int q : m.vertex_quad_ring(v))
        if (!in_cavity[q]) {
          fix = q;
          break;
        }
      if (fix < 0 || refused[fix] || (int)quads.size() >= rules.max_quads) {
        stuck = true;
        break;
      }
      if (add_quad(fix) != 0) stuck = true;
    }
    if (stuck) break;
    if (bad > 0) break;  // a protected vertex can no longer keep its valence
    if (absorbed_irr > emitted_irr) {
      std::vector<int> sorted = quads;
      std::sort(sorted.begin(), sorted.end());
      out.push_back(extract_cavity(m, sorted));
      emitted_irr = absorbed_irr;
      if ((int)out.size() >= rules.max_candidates) break;
    }
    bool grew = false;
    while (!frontier.empty() && !grew) {
      int q = frontier.front();
      frontier.pop_front();
      queued[q] = 0;
      if (in_cavity[q] || refused[q]) continue;
      if ((int)quads.size() >= rules.max_quads) {
        frontier.clear();
        break;
      }
      int r = add_quad(q);
      if (r == 0)
        grew = true;
      else if (r == 2)
        refused[q] = 1;
    }
    if (!grew) break;
  }
  return out;
}

RemeshResult remesh_cavity(QuadMesh& m, const Cavity& c, const std::vector<const Pattern*>& allowed,
                           const RemeshOptions& opt) {
  RemeshResult res;
  const int B = (int)c.boundary.size();
  if (B == 0 || c.quads.empty()) {
    res.note = "empty cavity";
    return res;
  }

  std::vector<Vec2> chain(B);
  for (int p = 0; p < B; ++p) chain[p] = m.points[c.boundary[p]];

  std::vector<int> around = c.boundary;
  around.insert(around.end(), c.interior.begin(), c.interior.end());
  const MeshQuality before_q = quality_over(m, adjacent_quads(m, around));

  std::set<int> keep(opt.keep_valence.begin(), opt.keep_valence.end());

  bool matched_any = false;
  std::string fail_note;
  for (const Pattern* pat : allowed) {
    if (!pat || pat->sides.size() != c.sides.size()) continue;
    auto match = match_pattern(*pat, c.sides);
    if (!match) continue;
    matched_any = true;
    QuadMesh inst;
    try {
      inst = instantiate_pattern(*pat, *match, chain, c.sides, false);
    } catch (const std::exception&) {
      fail_note = "pattern instantiation failed";
      continue;
    }

    QuadMesh snapshot = m;
    std::vector<int> mv(inst.points.size(), -1);
    for (int t = 0; t < B; ++t) mv[t] = c.boundary[aligned_chain_index(*match, c.sides, t)];
    int interior_id = -1;
    for (int v : c.interior) {
      interior_id = m.labels[v].id;
      break;
    }
    for (int p = 0; p < B && interior_id < 0; ++p)
      if (m.labels[c.boundary[p]].cls == VertexClass::Interior)
        interior_id = m.labels[c.boundary[p]].id;
    std::vector<int> fresh;
    for (int t = B; t < (int)inst.points.size(); ++t) {
      mv[t] = (int)m.points.size();
      fresh.push_back(mv[t]);
      m.points.push_back(inst.points[t]);
      m.labels.push_back({VertexClass::Interior, interior_id});
    }

    std::vector<char> in_cavity(snapshot.quads.size(), 0);
    for (int q : c.quads) in_cavity[q] = 1;
    std::vector<std::array<int, 4>> new_quads;
    new_quads.reserve(snapshot.quads.size() - c.quads.size() + inst.quads.size());
    for (int q = 0; q < (int)snapshot.quads.size(); ++q)
      if (!in_cavity[q]) new_quads.push_back(snapshot.quads[q]);
    for (const auto& t : inst.quads) new_quads.push_back({mv[t[0]], mv[t[1]], mv[t[2]], mv[t[3]]});
    m.quads = std::move(new_quads);

    std::vector<int> vmap(m.points.size());
    for (int v = 0; v < (int)m.points.size(); ++v) vmap[v] = v;
    if (!c.interior.empty()) {
      std::vector<char> drop(m.points.size(), 0);
      for (int v : c.interior) drop[v] = 1;
      int w = 0;
      for (int v = 0; v < (int)m.points.size(); ++v) {
        if (drop[v]) {
          vmap[v] = -1;
          continue;
        }
        if (w != v) {
          m.points[w] = m.points[v];
          m.labels[w] = m.labels[v];
        }
        vmap[v] = w++;
      }
      m.points.resize(w);
      m.labels.resize(w);
      for (auto& q : m.quads)
        for (auto& v : q) v = vmap[v];
      for (auto& v : fresh) v = vmap[v];
    }

    bool ok = true;
    try {
      m.build_connectivity();
      require_census(m, "cavity remesh");
    } catch (const std::exception&) {
      ok = false;
      fail_note = "replacement broke the mesh";
    }
    if (ok) {
      // the model boundary and the protected vertices keep their valence
      for (int p = 0; p < B && ok; ++p) {
        int v_old = c.boundary[p];
        if (snapshot.labels[v_old].cls == VertexClass::Interior && !keep.count(v_old)) continue;
        ok = vmap[v_old] >= 0 && m.valence(vmap[v_old]) == snapshot.valence(v_old);
      }
      if (!ok) fail_note = "replacement disturbs a fixed valence";
    }
    if (ok) {
      try {
        std::vector<int> core(B);
        for (int p = 0; p < B; ++p) core[p] = vmap[c.boundary[p]];
        core.insert(core.end(), fresh.begin(), fresh.end());
        std::vector<int> enlarged = adjacent_quads(m, core);
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
        smooth_loop(m, free_verts, opt.model);
        if (quality_over(m, enlarged).min_sicn <= 0.0 && free_verts.size() <= 50)
          untangle_local(m, enlarged, free_verts);
        MeshQuality after_q = quality_over(m, enlarged);
        if (!(after_q.min_sicn > 0.0)) {
          ok = false;
          fail_note = "replacement leaves tangled quads";
        } else if (!opt.gate.accepts(before_q, after_q)) {
          ok = false;
          fail_note = "replacement would lower quality";
        }
      } catch (const std::exception&) {
        ok = false;
        fail_note = "replacement leaves tangled quads";
      }
    }
    if (!ok) {
      m = snapshot;
      continue;
    }

    res.accepted = true;
    res.pattern = pat->name;
    res.fresh = std::move(fresh);
    res.vertex_map.assign(vmap.begin(), vmap.begin() + snapshot.points.size());
    return res;
  }
  res.note = matched_any ? fail_note : "no pattern matches";
  return res;
}

std::vector<int> match_singularities(const QuadMesh& m, const std::vector<Singularity>& sings,
                                     const std::function<double(const Vec2&)>& local_size) {
  std::vector<int> out(sings.size(), -1);
  std::vector<char> claimed(m.points.size(), 0);
  for (size_t k = 0; k < sings.size(); ++k) {
    int want = sings[k].index > 0 ? 3 : 5;
    int best = -1;
    double best_d = 0.0;
    for (int v = 0; v < (int)m.points.size(); ++v) {
      if (claimed[v] || m.labels[v].cls != VertexClass::Interior || m.boundary_vertex(v)) continue;
      if (m.valence(v) != want) continue;
      double d = (m.points[v] - sings[k].position).norm();
      if (best < 0 || d < best_d) {
        best = v;
        best_d = d;
      }
    }
    if (best >= 0 && best_d <= 3.0 * local_size(sings[k].position)) {
      out[k] = best;
      claimed[best] = 1;
    }
  }
  return out;
}

QuasiStats quasi_structure_face(QuadMesh& m, std::vector<int>& singular,
                                const PatternCatalogue& cat, const QuasiOptions& opt) {
  QuasiStats st;
  st.initial_irregular = interior_irregular_count(m);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  auto budget_ok = [&] { return st.trials < opt.max_trials && elapsed_ms() < opt.max_time_ms; };

  // the catalogue by shape: the plain grid, the two patterns carrying one
  // interior irregular, and every four sided pattern for the final pass
  const Pattern* grid_p = nullptr;
  const Pattern* tri_p = nullptr;
  const Pattern* pent_p = nullptr;
  std::vector<const Pattern*> four_sided;
  for (const Pattern& p : cat.patterns) {
    if (p.sides.size() == 3 && !tri_p) tri_p = &p;
    if (p.sides.size() == 5 && !pent_p) pent_p = &p;
    if (p.sides.size() != 4) continue;
    four_sided.push_back(&p);
    std::set<int> rim;
    for (const auto& side : p.sides) rim.insert(side.begin(), side.end());
    if (rim.size() == p.points.size() && !grid_p) grid_p = &p;
  }

  auto marks = [&] {
    std::set<int> s;
    for (int v : singular)
      if (v >= 0) s.insert(v);
    return s;
  };
  auto unnecessary = [&] {
    auto mk = marks();
    std::vector<int> out;
    for (int v = 0; v < (int)m.points.size(); ++v)
      if (m.valence(v) > 0 && !m.boundary_vertex(v) && m.valence(v) != 4 && !mk.count(v))
        out.push_back(v);
    return out;
  };
  auto growth_rules = [&](int allow) {
    GrowthRules g;
    for (int v : singular)
      if (v >= 0) g.preserved.push_back(v);
    if (allow >= 0) g.allow_interior.push_back(allow);
    return g;
  };

  // One replacement attempt. Accepts only when the interior irregular count
  // strictly drops and every mark survives; ids in `singular` are rewritten,
  // a swallowed seed passing its mark to the replacement irregular.
  auto try_accept = [&](const Cavity& cav, const std::vector<const Pattern*>& pats, int step,
                        int exempt) {
    ++st.trials;
    QuadMesh snap = m;
    std::vector<int> snap_marks = singular;
    int before = interior_irregular_count(m);
    RemeshOptions ro;
    ro.model = opt.model;
    for (int v : singular)
      if (v >= 0 && v != exempt) ro.keep_valence.push_back(v);
    RemeshResult r = remesh_cavity(m, cav, pats, ro);
    if (!r.accepted) return false;
    bool ok = interior_irregular_count(m) < before;
    for (size_t k = 0; k < singular.size() && ok; ++k) {
      int v = singular[k];
      if (v < 0) continue;
      int w = r.vertex_map[v];
      if (w < 0)
        for (int f : r.fresh)
          if (m.valence(f) != 4) {
            w = f;
            break;
          }
      if (w < 0)
        ok = false;
      else
        singular[k] = w;
    }
    if (!ok) {
      m = std::move(snap);
      singular = std::move(snap_marks);
      return false;
    }
    ++st.accepted;
    ++st.accepted_step[step];
    return true;
  };

  // sweep over unnecessary irregulars, largest grid cavity first
  auto grid_pass = [&](int step) {
    bool any = false;
    if (!grid_p) return any;
    bool progress = true;
    while (progress && budget_ok()) {
      progress = false;
      for (int u : unnecessary()) {
        if (!budget_ok()) break;
        auto seed = m.vertex_quad_ring(u);
        if (seed.empty()) continue;
        auto cands = grow_cavity(m, seed, growth_rules(-1));
        for (int i = (int)cands.size() - 1; i >= 0 && budget_ok(); --i) {
          if (cands[i].sides.size() != grid_p->sides.size()) continue;
          if (!match_pattern(*grid_p, cands[i].sides)) continue;
          if (try_accept(cands[i], {grid_p}, step, -1)) {
            any = progress = true;
            break;
          }
        }
        if (progress) break;  // ids shifted, rebuild the worklist
      }
    }
    return any;
  };

  // around each mark, the smallest cavity that also nets off-list irregulars
  // and whose interior index sum matches the seed
  auto seeded_pass = [&] {
    bool any = false;
    bool progress = true;
    while (progress && budget_ok()) {
      progress = false;
      for (size_t k = 0; k < singular.size() && !progress && budget_ok(); ++k) {
        int sv = singular[k];
        if (sv < 0) continue;
        const Pattern* pat = m.valence(sv) == 3 ? tri_p : m.valence(sv) == 5 ? pent_p : nullptr;
        if (!pat) continue;
        int k_seed = 4 - m.valence(sv);
        auto seed = m.vertex_quad_ring(sv);
        if (seed.empty()) continue;
        auto cands = grow_cavity(m, seed, growth_rules(sv));
        auto mk = marks();
        for (size_t i = 0; i < cands.size() && budget_ok(); ++i) {
          int sum_k = 0, extra = 0;
          for (int v : cands[i].interior) {
            sum_k += 4 - m.valence(v);
            if (v != sv && m.valence(v) != 4 && !mk.count(v)) ++extra;
          }
          if (extra < 1 || sum_k != k_seed) continue;
          if (cands[i].sides.size() != pat->sides.size()) continue;
          if (!match_pattern(*pat, cands[i].sides)) continue;
          if (try_accept(cands[i], {pat}, 1, sv)) {
            any = progress = true;
            break;
          }
        }
      }
    }
    return any;
  };

  // last resort: smallest cavity taking any four sided pattern
  auto mixed_pass = [&] {
    bool any = false;
    if (four_sided.empty()) return any;
    bool progress = true;
    while (progress && budget_ok()) {
      progress = false;
      for (int u : unnecessary()) {
        if (!budget_ok()) break;
        auto seed = m.vertex_quad_ring(u);
        if (seed.empty()) continue;
        auto cands = grow_cavity(m, seed, growth_rules(-1));
        for (size_t i = 0; i < cands.size() && budget_ok(); ++i) {
          bool fits = false;
          for (const Pattern* p : four_sided)
            if (cands[i].sides.size() == p->sides.size() &&
                match_pattern(*p, cands[i].sides)) {
              fits = true;
              break;
            }
          if (!fits) continue;
          if (try_accept(cands[i], four_sided, 3, -1)) {
            any = progress = true;
            break;
          }
        }
        if (progress) break;
      }
    }
    return any;
  };

  while (budget_ok()) {
    ++st.sweeps;
    if (unnecessary().empty()) break;
    bool any = grid_pass(0);
    any = seeded_pass() || any;
    any = grid_pass(2) || any;
    any = mixed_pass() || any;
    if (!any) break;
  }
  st.final_irregular = interior_irregular_count(m);
  return st;
}

}  // namespace quasiquad
