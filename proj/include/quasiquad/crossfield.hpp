#pragma once

#include <Eigen/Sparse>
#include <cstdint>

#include "quasiquad/model.hpp"
#include "quasiquad/tri_mesh.hpp"

namespace quasiquad {

// Crouzeix-Raviart discretization: one degree of freedom per edge.
struct CrSystem {
  Eigen::SparseMatrix<double> K;  // stiffness, rows sum to zero
  Eigen::VectorXd M;              // lumped mass, (|t0|+|t1|)/3 per edge
};
CrSystem assemble_cr_matrices(const TriMesh& mesh);

// Per-edge cross directions as (cos 4t, sin 4t) in the global frame.
// theta(e) re-expresses the cross relative to the edge tangent, so boundary
// edges report 0.
struct CrossField {
  const TriMesh* mesh = nullptr;
  std::vector<Vec2> u;
  std::vector<std::uint8_t> fixed;  // Dirichlet edges (boundary + extension layer)
  int iterations = 0;
  int energy_increases = 0;

  double theta_global(int e) const;  // in (-pi/4, pi/4]
  double theta(int e) const;         // w.r.t. edge tangent, in (-pi/4, pi/4]
};

// Tangent-aligned crosses on boundary edges, neutral elsewhere.
CrossField boundary_aligned_field(const TriMesh& mesh);

// Fixes every edge of every boundary-touching triangle by a harmonic fill
// of the one-triangle layer; later diffusion treats them as Dirichlet data.
void extend_boundary_conditions(const TriMesh& mesh, CrossField& f);

// Multilevel diffusion-projection iteration. Per level the diffusion
// coefficient interpolates from (0.1 * bbox diagonal)^2 down to
// (3 * min edge length)^2; a level stops when the max coefficient change
// drops below tol.
CrossField mbo_solve(const TriMesh& mesh, int levels = 5, double tol = 1e-3);

enum class SingularityOrigin { Field, AcuteCorner };

struct Singularity {
  Vec2 position;
  int index = 0;  // +1 or -1
  SingularityOrigin origin = SingularityOrigin::Field;
};

struct SingularityList {
  std::vector<Singularity> entries;
  // vertices where the winding is inconsistent (|index| >= 2 or mixed-sign
  // clusters); diagnostics only, never fatal
  std::vector<int> defect_vertices;
};

// Angle defect between the crosses of two consecutive spoke edges whose
// tangent frames differ by alpha_j, folded into [-pi/4, pi/4].
double angle_diff(double theta_jk, double theta_ij, double alpha_j);

// Interior-vertex winding numbers; clusters of non-zero vertices collapse to
// one entry at the vertex, edge midpoint, or barycenter.
SingularityList detect_singularities(const CrossField& f);

// Appends one +1 entry per model corner of the face with interior angle
// below 45 degrees.
SingularityList augment_acute_corners(const PlanarModel& m, int face, SingularityList list);

// Scaling h = e^(H+C) whose inverse square integrates to the quad target.
struct ConformalScaling {
  std::vector<double> H;  // per vertex, zero mean
  double C = 0.0;
  std::vector<double> h;  // per vertex, e^(H+C)
};
ConformalScaling conformal_scaling(const CrossField& f, double target_quads, int anchor = 0);

}  // namespace quasiquad
