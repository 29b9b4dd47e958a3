#pragma once

#include <array>
#include <vector>

#include "quasiquad/geometry.hpp"
#include "quasiquad/model.hpp"
#include "quasiquad/quad_mesh.hpp"
#include "quasiquad/quality.hpp"

namespace quasiquad {

// Quality over a subset of quads; empty subset scores perfect.
MeshQuality quality_over(const QuadMesh& m, const std::vector<int>& quads);

// Quads incident to any listed vertex, ascending, deduplicated.
std::vector<int> adjacent_quads(const QuadMesh& m, const std::vector<int>& verts);

// Mean-of-neighbors positions for the free vertices, both coordinates solved
// against the same sparse factorization. Free vertices must each connect,
// directly or through other free vertices, to at least one fixed vertex;
// otherwise the system is singular and the solve throws.
std::vector<Vec2> laplacian_solve(const QuadMesh& m, const std::vector<int>& free_verts);

// Finite-difference Winslow update for a regular interior vertex. ring holds
// the link CCW, alternating edge neighbor and diagonal corner starting at an
// edge neighbor: ring[0], ring[2], ring[4], ring[6] are the edge neighbors.
// Degenerate stencils (both axis vectors vanish) return x unchanged.
Vec2 winslow_kernel(const Vec2& x, const std::array<Vec2, 8>& ring);

// Angle-based update: project x onto the wedge bisector at each ring vertex
// and average the projections. ring is the link polygon in order; for open
// chains (boundary vertices) pass closed = false, the two end vertices then
// carry no wedge.
Vec2 angle_kernel(const Vec2& x, const std::vector<Vec2>& ring, bool closed = true);

// Accept rule comparing cavity quality around a local operation. The strict
// default accepts only a non-decreasing min SICN. The tradeoff branch also
// accepts drops that keep the min above `floor` while the mean loses at most
// a `mean_drop` fraction.
struct QualityGate {
  bool allow_tradeoff = false;
  double floor = 0.3;
  double mean_drop = 0.1;
  bool accepts(const MeshQuality& before, const MeshQuality& after) const;
};

struct SmoothOptions {
  int max_iter = 50;
  double time_budget_ms = 1.0e9;
  QualityGate gate;
};

struct SmoothResult {
  bool accepted = false;
  int iterations = 0;
  MeshQuality before;
  MeshQuality after;  // equals `before` when the result was rolled back
};

// Iterative kernel smoothing of the free vertices, Gauss-Seidel order as
// given. Regular interior vertices take Winslow updates, all others the
// angle kernel. Vertices labeled OnCurve slide along their model curve
// polyline (fixed when no model is supplied); corners never move. The sweep
// stops once every displacement falls below 1e-3 of the local edge length,
// or at max_iter. The gate then compares quality over the quads incident to
// the free vertices; on rejection all positions are restored bit-exact.
SmoothResult smooth_loop(QuadMesh& m, const std::vector<int>& free_verts,
                         const PlanarModel* model = nullptr,
                         const SmoothOptions& opt = SmoothOptions{});

struct UntangleResult {
  bool success = false;
  double min_sicn = 0.0;  // over the cavity quads at return
};

// Derivative-free repair of a small cavity: per-vertex compass search with
// shrinking steps, maximizing the minimum SICN over cavity_quads. Only
// improving moves are taken, so a valid cavity never gets worse. Success
// means the final minimum is positive; on failure the original positions
// are restored. Throws when more than 50 free vertices are passed.
UntangleResult untangle_local(QuadMesh& m, const std::vector<int>& cavity_quads,
                              const std::vector<int>& free_verts, double budget_ms = 1000.0);

}  // namespace quasiquad
