#pragma once

#include "quasiquad/crossfield.hpp"
#include "quasiquad/quad_mesh.hpp"
#include "quasiquad/quantize.hpp"

namespace quasiquad {

// Angle of one cross branch at p, by Crouzeix-Raviart interpolation of the
// field on its host triangulation. The other branches sit at multiples of
// pi/2 from it.
double cross_angle_at(const CrossField& f, const TriLocator& loc, const Vec2& p);

// Breadth-first interior point seeding. Every queued vertex proposes four
// candidates along the local cross directions at distance s; a candidate
// survives when it lies inside the meshed region and no existing vertex is
// closer than 0.7 s. Accepted points are Delaunay-inserted and queued in
// turn. The input is a conforming face triangulation whose boundary edges
// act as constraints; new vertices are labeled Interior with face_id.
TriMesh frontal_insert(const TriMesh& work, const CrossField& field, const SizeEval& s,
                       int face_id = -1);

// Triangles plus the quads formed by merging triangle pairs.
struct MixedMesh {
  std::vector<Vec2> points;
  std::vector<VertexLabel> labels;
  std::vector<std::array<int, 4>> quads;
  std::vector<std::array<int, 3>> tris;
};

// Greedy pairing of adjacent triangles. Pairs are ranked by quad quality
// weighted by how well the quad edges follow the cross directions, and
// merged while both triangles are unused and the quad quality clears 0.1.
// Unpaired triangles stay triangles.
MixedMesh combine_quads(const TriMesh& mesh, const CrossField& field);

// One level of midpoint refinement: each quad becomes 4 quads, each triangle
// 3, so the result is all-quad. Midpoints of boundary edges are pulled onto
// their curve polyline; a projection that would invert an adjacent quad is
// undone for that vertex.
QuadMesh midpoint_subdivide(const MixedMesh& mixed, const PlanarModel& m);

}  // namespace quasiquad
