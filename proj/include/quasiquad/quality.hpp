#pragma once

#include <array>

#include "quasiquad/quad_mesh.hpp"

namespace quasiquad {

// Min-corner signed inverse condition number in [-1,1]; 1 on squares,
// <= 0 on inverted elements, 0 for fully degenerate input.
double sicn_quality(const std::array<Vec2, 4>& q);

// Min-corner scaled Jacobian; corner with a zero-length edge scores 0.
double scaled_jacobian(const std::array<Vec2, 4>& q);

double quad_sicn(const QuadMesh& m, int q);

struct MeshQuality {
  double min_sicn = 1.0;
  double avg_sicn = 1.0;
};
MeshQuality mesh_quality(const QuadMesh& m);

}  // namespace quasiquad
