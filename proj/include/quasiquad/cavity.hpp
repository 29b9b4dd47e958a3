#pragma once

#include <climits>
#include <functional>
#include <string>
#include <vector>

#include "quasiquad/crossfield.hpp"
#include "quasiquad/patterns.hpp"
#include "quasiquad/smoothing.hpp"

namespace quasiquad {

// Simply connected set of quads together with its boundary bookkeeping.
// boundary[p] -> boundary[(p+1) % B] walks the closed cycle CCW, interior on
// the left. n_in/n_out count incident quads inside and outside the set, per
// boundary position. A position is a convex corner iff n_in == 1, concave iff
// the vertex is interior to the face (label Interior) with n_out == 1. Sides
// split the cycle at the corners; with no corner the whole cycle is one side.
struct Cavity {
  std::vector<int> quads;     // ascending quad ids
  std::vector<int> boundary;  // closed CCW vertex cycle
  std::vector<int> n_in;
  std::vector<int> n_out;
  std::vector<int> interior;  // vertices with every incident quad in the set
  std::vector<int> corners;   // positions with n_in == 1, ascending
  std::vector<int> concave;   // positions of Interior-class vertices with n_out == 1
  std::vector<int> sides;     // edges per side, side j starting at corners[j]

  bool convex() const { return concave.empty(); }
};

// Builds the Cavity record for an explicit quad set. The cycle is rotated so
// it starts at the corner with the smallest vertex id, or at the smallest
// boundary vertex when no corner exists. Throws std::invalid_argument when
// the set is empty, not edge-connected, or bounded by more than one cycle.
Cavity extract_cavity(const QuadMesh& m, const std::vector<int>& quads);

struct GrowthRules {
  // Vertices that must keep their valence: growth refuses the quad that would
  // swallow one, and candidates are withheld while one sits on the boundary
  // with n_in >= 3 (a replacement there would reshape it).
  std::vector<int> preserved;
  // Preserved vertices the cavity is allowed to swallow (its own seeds).
  std::vector<int> allow_interior;
  int max_quads = INT_MAX;
  int max_candidates = 10000;
};

// Grows the seed set one adjacent quad at a time, absorbing the exterior quad
// at any concave boundary vertex first so emitted states are convex. Each
// addition glues along a single contiguous edge run, keeping the set a disk.
// A candidate is emitted for the first convex state and then whenever the set
// of absorbed irregular interior vertices grew, skipping states where a
// preserved or model-boundary vertex sits on the cycle with n_in >= 3.
// Growth stops at face exhaustion, at the caps, or when the quad fixing a
// concavity is refused. An invalid seed yields an empty sequence.
std::vector<Cavity> grow_cavity(const QuadMesh& m, const std::vector<int>& seed,
                                const GrowthRules& rules = GrowthRules{});

struct RemeshOptions {
  QualityGate gate;  // compared over the cavity plus one quad ring
  const PlanarModel* model = nullptr;
  // Cycle vertices that must keep their valence, beyond the model-boundary
  // ones (which always do).
  std::vector<int> keep_valence;
};

struct RemeshResult {
  bool accepted = false;
  std::string note;
  std::string pattern;          // name of the pattern used, on acceptance
  std::vector<int> vertex_map;  // old vertex id -> new id, -1 for removed
  std::vector<int> fresh;       // replacement interior vertex ids
};

// Replaces the cavity interior with the first allowed pattern whose
// subdivision problem solves against the cavity sides. The instantiated
// patch is spliced in, dead interior vertices compacted away, and the
// surroundings smoothed; the change sticks only when the census holds and
// the quality gate accepts the enlarged ring against its prior state with a
// strictly positive minimum. On rejection the mesh is restored bit-exact
// and the next allowed pattern is tried.
RemeshResult remesh_cavity(QuadMesh& m, const Cavity& c,
                           const std::vector<const Pattern*>& allowed,
                           const RemeshOptions& opt = RemeshOptions{});

// For each entry, in order: the nearest unclaimed interior irregular vertex
// of matching index (+1 claims valence 3, -1 valence 5) within three times
// local_size at the entry position; -1 when none is in range.
std::vector<int> match_singularities(const QuadMesh& m, const std::vector<Singularity>& sings,
                                     const std::function<double(const Vec2&)>& local_size);

struct QuasiOptions {
  int max_trials = 10000;       // grow-and-remesh attempts per call
  double max_time_ms = 3.0e5;
  const PlanarModel* model = nullptr;
};

struct QuasiStats {
  int initial_irregular = 0;
  int final_irregular = 0;
  int trials = 0;
  int accepted = 0;
  int accepted_step[4] = {0, 0, 0, 0};
  int sweeps = 0;

  double acceptance_rate() const {
    return trials > 0 ? (double)accepted / (double)trials : 0.0;
  }
};

// Topological cleanup of one face mesh. Sweeps four passes while any of them
// accepts a change: maximal grid-matching cavities seeded at unnecessary
// irregular vertices; minimal triangle or pentagon cavities seeded at the
// marked singular vertices, each absorbing at least one unnecessary irregular
// while keeping the seed index; the grid pass again; minimal cavities over
// the four rectangular patterns. Every acceptance must strictly reduce the
// interior irregular count, singular marks are never absorbed (a swallowed
// seed transfers its mark to the replacement irregular), and the marks in
// `singular` are rewritten in place as vertex ids shift.
QuasiStats quasi_structure_face(QuadMesh& m, std::vector<int>& singular,
                                const PatternCatalogue& cat = builtin_catalogue(),
                                const QuasiOptions& opt = QuasiOptions{});

}  // namespace quasiquad
