#include "quasiquad/quad_mesh.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace quasiquad {

void QuadMesh::build_connectivity() {
  size_t H = 4 * quads.size();
  twin.assign(H, -1);
  std::map<std::pair<int, int>, int> directed;
  for (size_t q = 0; q < quads.size(); ++q) {
    for (int k = 0; k < 4; ++k) {
      int he = static_cast<int>(4 * q) + k;
      int a = he_from(he), b = he_to(he);
      if (a == b) throw std::runtime_error("degenerate quad edge");
      if (!directed.emplace(std::make_pair(a, b), he).second)
        throw std::runtime_error("non-manifold: directed edge repeated");
    }
  }
  for (auto& [ab, he] : directed) {
    auto it = directed.find({ab.second, ab.first});
    twin[he] = it == directed.end() ? -1 : it->second;
  }

  // valence = number of incident quads (equals edge valence for interior
  // vertices; boundary vertices have one more edge than quads)
  valence_cache.assign(points.size(), 0);
  on_boundary.assign(points.size(), 0);
  vert_he.assign(points.size(), -1);
  for (const auto& q : quads)
    for (int v : q) ++valence_cache[v];
  for (int he = 0; he < static_cast<int>(H); ++he) {
    int a = he_from(he);
    if (vert_he[a] < 0) vert_he[a] = he;
    if (twin[he] < 0) {
      on_boundary[a] = 1;
      on_boundary[he_to(he)] = 1;
      vert_he[a] = he;  // boundary fans start at the boundary half-edge
    }
  }
}

int QuadMesh::edge_count() const {
  int boundary = 0;
  for (int t : twin)
    if (t < 0) ++boundary;
  return (static_cast<int>(twin.size()) + boundary) / 2;
}

std::vector<int> QuadMesh::vertex_quad_ring(int v) const {
  std::vector<int> ring;
  int start = vert_he[v];
  if (start < 0) return ring;
  int h = start;
  for (size_t guard = 0; guard <= quads.size(); ++guard) {
    ring.push_back(he_quad(h));
    int nh = twin[he_prev(h)];  // CCW rotation around v
    if (nh < 0 || nh == start) return ring;
    h = nh;
  }
  throw std::runtime_error("vertex fan does not close: non-manifold vertex");
}

std::vector<int> QuadMesh::vertex_neighbors(int v) const {
  std::vector<int> nbr;
  int start = vert_he[v];
  if (start < 0) return nbr;
  int h = start;
  for (size_t guard = 0; guard <= quads.size(); ++guard) {
    nbr.push_back(he_to(h));
    int nh = twin[he_prev(h)];
    if (nh < 0) {
      nbr.push_back(he_from(he_prev(h)));
      return nbr;
    }
    if (nh == start) return nbr;
    h = nh;
  }
  throw std::runtime_error("vertex fan does not close: non-manifold vertex");
}

int euler_characteristic(const QuadMesh& m) {
  std::vector<std::uint8_t> used(m.points.size(), 0);
  for (const auto& q : m.quads)
    for (int v : q) used[v] = 1;
  int n = 0;
  for (auto u : used) n += u;
  return n - m.edge_count() + static_cast<int>(m.quads.size());
}

int VertexIndexCensus::lhs() const {
  int s = 0;
  for (auto [k, c] : n) s += k * c;
  for (auto [k, c] : m) s += k * c;
  return s;
}

std::string VertexIndexCensus::to_string() const {
  std::ostringstream os;
  os << "chi=" << chi << " interior{";
  for (auto [k, c] : n) os << " " << k << ":" << c;
  os << " } boundary{";
  for (auto [k, c] : m) os << " " << k << ":" << c;
  os << " } lhs=" << lhs() << " rhs=" << 4 * chi;
  return os.str();
}

VertexIndexCensus index_census(const QuadMesh& mesh) {
  VertexIndexCensus c;
  c.chi = euler_characteristic(mesh);
  std::vector<std::uint8_t> used(mesh.points.size(), 0);
  for (const auto& q : mesh.quads)
    for (int v : q) used[v] = 1;
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    if (!used[v]) continue;
    if (mesh.boundary_vertex(static_cast<int>(v)))
      ++c.m[2 - mesh.valence(static_cast<int>(v))];
    else
      ++c.n[4 - mesh.valence(static_cast<int>(v))];
  }
  return c;
}

void require_census(const QuadMesh& mesh, const std::string& where) {
  VertexIndexCensus c = index_census(mesh);
  if (!c.identity_holds())
    throw std::runtime_error("vertex index census identity violated at " + where + ": " + c.to_string());
}

void check_quad_mesh(const QuadMesh& mesh) {
  for (const auto& q : mesh.quads) {
    for (int k = 0; k < 4; ++k)
      for (int l = k + 1; l < 4; ++l)
        if (q[k] == q[l]) throw std::runtime_error("quad with repeated vertex");
  }
  for (int he = 0; he < static_cast<int>(mesh.twin.size()); ++he) {
    int t = mesh.twin[he];
    if (t < 0) continue;
    if (mesh.twin[t] != he) throw std::runtime_error("twin not an involution");
    if (mesh.he_from(he) != mesh.he_to(t) || mesh.he_to(he) != mesh.he_from(t))
      throw std::runtime_error("twin endpoints mismatched");
  }
  std::vector<int> qcount(mesh.points.size(), 0);
  for (const auto& q : mesh.quads)
    for (int v : q) ++qcount[v];
  for (size_t v = 0; v < mesh.points.size(); ++v)
    if (qcount[v] != mesh.valence_cache[v])
      throw std::runtime_error("valence cache stale at vertex " + std::to_string(v));
  // fans must cover each vertex's incident quads exactly once
  for (size_t v = 0; v < mesh.points.size(); ++v) {
    if (mesh.vert_he[v] < 0) {
      if (qcount[v] != 0) throw std::runtime_error("vertex with quads but no fan anchor");
      continue;
    }
    if (static_cast<int>(mesh.vertex_quad_ring(static_cast<int>(v)).size()) != qcount[v])
      throw std::runtime_error("vertex fan incomplete: non-manifold vertex " + std::to_string(v));
  }
}

int interior_irregular_count(const QuadMesh& mesh) {
  std::vector<std::uint8_t> used(mesh.points.size(), 0);
  for (const auto& q : mesh.quads)
    for (int v : q) used[v] = 1;
  int c = 0;
  for (size_t v = 0; v < mesh.points.size(); ++v)
    if (used[v] && !mesh.boundary_vertex(static_cast<int>(v)) && mesh.valence(static_cast<int>(v)) != 4) ++c;
  return c;
}

}  // namespace quasiquad
