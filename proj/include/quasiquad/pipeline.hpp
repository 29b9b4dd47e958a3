#pragma once

#include <string>
#include <vector>

#include "quasiquad/cavity.hpp"
#include "quasiquad/crossfield.hpp"
#include "quasiquad/diskquad.hpp"
#include "quasiquad/model.hpp"
#include "quasiquad/patterns.hpp"
#include "quasiquad/quad_mesh.hpp"
#include "quasiquad/sizing.hpp"

namespace quasiquad {

struct PipelineConfig {
  int target_quads = 500;
  double g_max = kDefaultGradation;
  int levels = 5;              // diffusion levels per face
  unsigned seed = 0;           // reserved for tie-breaking randomization; unused
  bool use_premesh = true;     // try catalogue patterns on simple faces first
  int max_trials_per_face = 10000;
  double max_time_per_face_ms = 3.0e5;
  int smooth_iters = 50;       // final per-face smoothing budget
  int jobs = 1;                // faces meshed in parallel when > 1
  std::string dump_fields_prefix;  // when set, write <prefix>_face<k>.vtk dumps
  const PatternCatalogue* catalogue = nullptr;  // builtin_catalogue() when null
  const DiskQuadTable* disk_table = nullptr;    // builtin_disk_table() when null
};

// Blended size map on the union sizing triangulation of all faces. Faces are
// welded on their shared curve chains, so the map is continuous across faces.
struct SizeMap {
  TriMesh mesh;
  std::vector<double> values;
  SizeField field() const { return SizeField{&mesh, values}; }
};

// The sizing phase alone: per-face cross fields and conformal scalings, the
// small-feature bound, pointwise minimum, gradation limiting.
SizeMap build_size_map(const PlanarModel& m, const PipelineConfig& cfg = PipelineConfig{});

struct FaceReport {
  int id = 0;
  std::string method;  // "pattern" or "unstructured"
  QuadMesh mesh;       // final face-local mesh
  SingularityList singular;
  int irregular_init = 0;   // interior irregular count of the initial mesh
  int irregular_final = 0;
  int cavity_trials = 0;
  double acceptance_rate = 0.0;
  double min_sicn = 0.0;
  double avg_sicn = 0.0;
  double time_init_ms = 0.0;
  double time_improve_ms = 0.0;
};

struct PipelineResult {
  QuadMesh mesh;  // all face meshes welded on shared curve vertices
  std::vector<FaceReport> faces;
  bool success = false;  // every face meshed with min SICN > 0
};

// The full run: size map, curve quantization, per-face meshing with the
// pattern-first fallback ladder, defect repair, quasi-structuring, final
// smoothing, and the cross-face weld.
PipelineResult run_pipeline(const PlanarModel& m, const PipelineConfig& cfg = PipelineConfig{});

// Welds per-face meshes into one. Curve and corner vertices are shared by
// exact position (faces meshing the same curve place them bit-identically);
// interior vertices are kept per face. Labels and quad order follow the
// input order. Throws when the welded mesh fails its census.
QuadMesh merge_face_meshes(const std::vector<const QuadMesh*>& faces);

}  // namespace quasiquad
