#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quasiquad/geometry.hpp"
#include "quasiquad/model.hpp"
#include "quasiquad/quad_mesh.hpp"
#include "quasiquad/quantize.hpp"

namespace quasiquad {

// Coarse catalogue pattern. Chords group the coarse edges into parallel
// families: opposite edges of a quad always share a chord. Subdividing chord
// j into s_j parts refines the pattern into an all-quad mesh whose side i
// then carries sum_j weight[i][j] * s_j boundary edges.
struct Pattern {
  std::string name;
  std::vector<Vec2> points;               // layout positions, used as seeds
  std::vector<std::array<int, 4>> quads;  // CCW, strictly convex in layout
  std::vector<std::vector<int>> sides;    // boundary point chains, CCW; each
                                          // side ends where the next begins
  int chord_count = 0;
  std::vector<int> edge_chord;            // chord of half-edge 4*q+k
  std::vector<std::vector<int>> weight;   // weight[side][chord], in {0,1,2}
};

// Derives chords and weights and validates the layout: convex CCW quads,
// sides covering the boundary exactly once in order, every chord touching
// the boundary, and the unit-subdivision index census. Throws
// std::invalid_argument on any violation.
Pattern make_pattern(std::string name, std::vector<Vec2> points,
                     std::vector<std::array<int, 4>> quads,
                     std::vector<std::vector<int>> sides);

struct PatternCatalogue {
  std::vector<Pattern> patterns;
};

// Reads {"patterns":[{name, points, quads, sides}, ...]} and validates each
// entry through make_pattern.
PatternCatalogue load_patterns(const std::string& path);

// The set shipped in data/patterns.json, loaded once.
const PatternCatalogue& builtin_catalogue();

// Alignment of pattern sides onto cavity sides. Forward: pattern side k maps
// to cavity side (rotation + k) % m. Reversed: pattern side k maps to cavity
// side (rotation - k + m) % m, traversed backward.
struct PatternMatch {
  std::vector<int> s;  // subdivision per chord, >= 1
  int rotation = 0;
  bool reversed = false;
  double objective = 0.0;  // sum of squared deviations from the balanced ideal
};

// Integer subdivisions solving sum_j w_kj s_j = N_aligned(k) for every
// pattern side, s_j >= 1. All 2m alignments are tried in a fixed order
// (rotation ascending, forward before reversed); candidate solutions are
// explored outward from the balanced ideal, at most 500 per alignment, and
// the lowest objective found wins, first encountered on ties. Returns
// nothing when no alignment admits a solution.
std::optional<PatternMatch> match_pattern(const Pattern& p, const std::vector<int>& sides);

// Cavity chain index holding boundary vertex t of an instantiated pattern,
// under the match alignment. side_counts are the cavity side edge counts in
// cavity order; t runs over 0 .. sum(side_counts)-1.
int aligned_chain_index(const PatternMatch& match, const std::vector<int>& side_counts, int t);

// Subdivides the pattern per match.s and fits it to the cavity: boundary
// vertex t takes position chain[aligned_chain_index(match, side_counts, t)],
// so mesh vertices 0 .. B-1 walk the pattern boundary. Interior coarse
// vertices are placed by a Laplace solve against the fixed boundary, the
// rest bilinearly per coarse quad, then kernel-smoothed unless smooth is
// false. Labels are left defaulted. Throws std::invalid_argument when chain
// or side_counts disagree with the match.
QuadMesh instantiate_pattern(const Pattern& p, const PatternMatch& match,
                             const std::vector<Vec2>& chain,
                             const std::vector<int>& side_counts, bool smooth = true);

struct PremeshOptions {
  double min_quality = 0.3;  // reject instantiations with min SICN below this
};

// Meshes a single-loop face directly from the catalogue when possible.
// Face corners are classified by interior angle into convex (one quarter
// turn) or flat; any sharper turn, a hole loop, or an all-flat loop
// disqualifies the face. Catalogue patterns with the matching side count are
// tried in order; the first whose subdivision problem solves and whose
// instantiated mesh clears min_quality is returned with boundary labels
// taken from the curve quantization. Returns nothing otherwise.
std::optional<QuadMesh> premesh_simple_face(const PlanarModel& m, int face,
                                            const CurveQuantization& q,
                                            const PatternCatalogue& cat = builtin_catalogue(),
                                            const PremeshOptions& opt = PremeshOptions{});

}  // namespace quasiquad
