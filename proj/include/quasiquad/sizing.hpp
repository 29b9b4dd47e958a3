#pragma once

#include "quasiquad/model.hpp"
#include "quasiquad/tri_mesh.hpp"

namespace quasiquad {

inline constexpr double kDefaultGradation = 0.3;

// Small-feature bound: on every curve vertex the minimum of the host curve's
// length and the distance to each curve that shares no corner with it.
// Interior vertices start at +infinity; propagation happens in the blend.
SizeField feature_size(const PlanarModel& m, const TriMesh& mesh);

// Gradation limiting: after the sweep |s(b) - s(a)| <= g_max * |b - a| holds
// on every edge. Monotone (never raises a value) and idempotent.
SizeField one_way_smooth(const TriMesh& mesh, const SizeField& field, double g_max);

// Splits the quad target across faces proportionally to area; explicit
// per-face hints are kept verbatim and only the remainder is distributed.
std::vector<int> face_quad_budget(const PlanarModel& m, int total_quads);

// Pulls per-face vertex values onto a shared mesh; a vertex referenced by
// several faces keeps the smallest value.
SizeField combine_face_fields(const TriMesh& global_mesh,
                              const std::vector<std::vector<int>>& face_to_global,
                              const std::vector<SizeField>& face_fields);

// Pointwise minimum of the scaling-derived and small-feature sizes, then
// gradation-limited.
SizeField blend_global(const TriMesh& mesh, const SizeField& s_cf, const SizeField& s_min,
                       double g_max);

}  // namespace quasiquad
