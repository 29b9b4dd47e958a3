#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "quasiquad/tri_mesh.hpp"

namespace quasiquad {

// Half-edge k of quad q has index 4*q+k and runs quads[q][k] -> quads[q][(k+1)%4].
struct QuadMesh {
  std::vector<Vec2> points;
  std::vector<VertexLabel> labels;
  std::vector<std::array<int, 4>> quads;

  // rebuilt by build_connectivity(); twin is an involution, -1 on boundary
  std::vector<int> twin;
  std::vector<int> valence_cache;
  std::vector<std::uint8_t> on_boundary;
  std::vector<int> vert_he;  // one outgoing half-edge per vertex, -1 if isolated

  static int he_quad(int he) { return he >> 2; }
  static int he_local(int he) { return he & 3; }
  int he_from(int he) const { return quads[he >> 2][he & 3]; }
  int he_to(int he) const { return quads[he >> 2][((he & 3) + 1) & 3]; }
  int he_next(int he) const { return (he & ~3) | (((he & 3) + 1) & 3); }
  int he_prev(int he) const { return (he & ~3) | (((he & 3) + 3) & 3); }

  void build_connectivity();
  // number of incident quads; for interior vertices this equals the number of
  // incident edges, for boundary vertices it is one less
  int valence(int v) const { return valence_cache[v]; }
  bool boundary_vertex(int v) const { return on_boundary[v] != 0; }
  std::array<Vec2, 4> quad_points(int q) const {
    return {points[quads[q][0]], points[quads[q][1]], points[quads[q][2]], points[quads[q][3]]};
  }
  int edge_count() const;

  // Ordered quads around v (CCW). For boundary vertices the fan starts at the
  // boundary half-edge leaving v.
  std::vector<int> vertex_quad_ring(int v) const;
  std::vector<int> vertex_neighbors(int v) const;  // edge-connected, same order
};

int euler_characteristic(const QuadMesh& m);

// Index counts: interior k = 4 - valence, boundary k = 2 - valence.
struct VertexIndexCensus {
  std::map<int, int> n;  // interior
  std::map<int, int> m;  // boundary
  int chi = 0;
  int lhs() const;
  bool identity_holds() const { return lhs() == 4 * chi; }
  std::string to_string() const;
};

VertexIndexCensus index_census(const QuadMesh& mesh);

// Hard internal oracle: throws with the offending counts when the census
// identity fails. Called after every accepted remeshing operation.
void require_census(const QuadMesh& mesh, const std::string& where);

void check_quad_mesh(const QuadMesh& mesh);  // twin involution + valence cache + orientation

int interior_irregular_count(const QuadMesh& mesh);

}  // namespace quasiquad
