#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quasiquad/geometry.hpp"

namespace quasiquad {

enum class VertexClass : std::uint8_t { Corner, OnCurve, Interior };

// id refers to a model corner, curve, or face depending on cls.
struct VertexLabel {
  VertexClass cls = VertexClass::Interior;
  int id = -1;
};

struct TriMesh {
  std::vector<Vec2> points;
  std::vector<VertexLabel> labels;
  std::vector<std::array<int, 3>> tris;

  // Unique undirected edges; t1 = -1 on the boundary. Edge k of triangle t
  // joins tris[t][k] and tris[t][(k+1)%3].
  struct Edge {
    int a = -1, b = -1;
    int t0 = -1, t1 = -1;
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges;

  void build_edges();
  bool boundary_edge(int e) const { return edges[e].t1 < 0; }
  double tri_area(int t) const;
  Vec2 tri_centroid(int t) const;
  Vec2 edge_midpoint(int e) const { return 0.5 * (points[edges[e].a] + points[edges[e].b]); }
  Vec2 edge_tangent(int e) const;  // unit, a -> b
  int opposite_vertex(int e, int t) const;
};

// Throws unless every interior edge has 2 adjacent triangles, boundary edges
// exactly 1, and all triangles are positively oriented.
void check_conforming(const TriMesh& m);

int euler_characteristic_tri(const TriMesh& m);

// Uniform-grid point locator over triangles.
class TriLocator {
 public:
  explicit TriLocator(const TriMesh& m);
  // Containing triangle if any, else the nearest one; bary clamped to the
  // simplex in the nearest case.
  int locate(const Vec2& p, std::array<double, 3>& bary) const;
  // True iff p lies in some triangle (closed region).
  bool inside(const Vec2& p) const;

 private:
  const TriMesh* mesh_;
  BBox box_;
  int nx_ = 1, ny_ = 1;
  double cw_ = 1.0, ch_ = 1.0;
  std::vector<std::vector<int>> cells_;
  void cell_of(const Vec2& p, int& cx, int& cy) const;
  int try_cell(int cx, int cy, const Vec2& p, std::array<double, 3>& bary) const;
};

// Piecewise-linear scalar field on TriMesh vertices; strictly positive when
// used as a size field.
struct SizeField {
  const TriMesh* mesh = nullptr;
  std::vector<double> values;
  double interpolate(const TriLocator& loc, const Vec2& p) const;
};

}  // namespace quasiquad
