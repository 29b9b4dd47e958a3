#pragma once

#include <functional>
#include <vector>

#include "quasiquad/model.hpp"
#include "quasiquad/tri_mesh.hpp"

namespace quasiquad {

// Pointwise size lookup used when integrating along curves.
using SizeEval = std::function<double(const Vec2&)>;

// Binds a vertex field and its locator; both must outlive the callable.
inline SizeEval field_eval(const SizeField& f, const TriLocator& loc) {
  return [&f, &loc](const Vec2& p) { return f.interpolate(loc, p); };
}

// Edge demand of one curve: the integral of dl / s along the polyline,
// trapezoidal with 16 subdivisions per polyline segment.
double ideal_edge_count(const std::vector<Vec2>& pts, const SizeEval& s);

// Interior mesh vertices of a curve meshed with n edges. Vertex i sits where
// the cumulative integral of dl / s reaches i/n of the curve total.
struct CurvePlacement {
  std::vector<double> params;  // arclength of each interior vertex, increasing
  std::vector<Vec2> points;    // matching positions, curve start to end
};
CurvePlacement place_curve_vertices(const std::vector<Vec2>& pts, int n, const SizeEval& s);

// Groups curves that must share one edge count: opposite sides of every
// 4-curve single-loop face, except pairs whose demands differ by more than a
// factor of 2. Entry is the group id, or -1 for unconstrained curves.
std::vector<int> build_chords(const PlanarModel& m, const std::vector<double>& ideal);

// Integer edge counts and interior vertex placement for every curve. Chord
// members get the rounded mean demand of the group, free curves their own
// rounded demand, never below one edge.
struct CurveQuantization {
  std::vector<double> ideal;           // edge demand per curve
  std::vector<int> count;              // edges per curve, >= 1
  std::vector<int> chord;              // shared-count group or -1
  std::vector<CurvePlacement> placed;  // interior vertices per curve
};
CurveQuantization quantize_curves(const PlanarModel& m, const SizeEval& s);

}  // namespace quasiquad
