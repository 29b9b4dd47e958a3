#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quasiquad/model.hpp"
#include "quasiquad/quad_mesh.hpp"

namespace quasiquad {

// Quad mesh of a topological disk, stored combinatorially. Vertices 0..b-1
// walk the boundary once counterclockwise, b..b+i-1 are interior, quads are
// CCW. Every vertex pair spans at most one edge.
struct DiskQuadrangulation {
  int b = 0;
  int i = 0;
  std::vector<std::array<int, 4>> quads;
  // derived incident-quad counts, rebuilt by recount()
  std::vector<int> n_in;
  std::vector<int> interior_valence;

  int vertex_count() const { return b + i; }
  void recount();
};

// Smallest oriented byte encoding over all 2b boundary alignments, interior
// vertices labeled in traversal order. Equal strings iff the disks are
// isomorphic under boundary rotation and reflection.
std::string canonical_form(const DiskQuadrangulation& d);

// The relabeling of d realizing canonical_form(d).
DiskQuadrangulation canonical_representative(const DiskQuadrangulation& d);

struct DiskQuadTable {
  // key (b, i); each bucket sorted by canonical form
  std::map<std::pair<int, int>, std::vector<DiskQuadrangulation>> entries;

  const std::vector<DiskQuadrangulation>* find(int b, int i) const;
  int total_count() const;
};

// Every disk quadrangulation with at most b_max boundary and i_max interior
// vertices, one canonical representative per isomorphism class, grown quad by
// quad from a single cell. With `filtered` only entries usable as cavity
// replacements are kept: interior valences in [3,5] and at most three quads
// on any boundary vertex.
DiskQuadTable enumerate_disk_quadrangulations(int b_max = 12, int i_max = 4,
                                              bool filtered = true);

void save_disk_table(const DiskQuadTable& table, const std::string& path);
DiskQuadTable load_disk_table(const std::string& path);

// The checked-in table data/disk_table.json, loaded on first use.
const DiskQuadTable& builtin_disk_table();

// Target incident-quad count per vertex: 4 for interior vertices, 2 on
// curves, corners by their incident angle in quarter turns.
std::vector<int> default_ideal_valences(const QuadMesh& m);

// Interior vertices tolerate valences 3..5; curve and corner vertices must
// hit their target exactly.
bool is_defect_vertex(const QuadMesh& m, int v, const std::vector<int>& ideal);

// Defective vertices, corners first, then curve vertices, then interior,
// ascending id within each class.
std::vector<int> defect_vertices(const QuadMesh& m, const std::vector<int>& ideal);

struct RepairResult {
  bool changed = false;
  std::string note;
};

// Replaces the one-ring cavity of `seed` by the table entry minimizing the
// summed squared valence deviation, preferring fewer vertices on ties. Curve
// and corner targets are hard constraints on the cavity rim, relaxed one
// class at a time (interior range first, corners last) only when nothing
// fits. The patch is accepted only if it strictly lowers the deviation (or
// matches it with fewer vertices), stays untangled after local smoothing,
// and keeps the index census; otherwise the mesh is restored bit for bit.
RepairResult repair_defect(QuadMesh& m, int seed, const DiskQuadTable& table,
                           const std::vector<int>& ideal_valence,
                           const PlanarModel* model = nullptr);

}  // namespace quasiquad
