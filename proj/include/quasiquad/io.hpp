#pragma once

#include <string>
#include <vector>

#include "quasiquad/crossfield.hpp"
#include "quasiquad/pipeline.hpp"
#include "quasiquad/quad_mesh.hpp"

namespace quasiquad {

// Wavefront OBJ: one "v x y 0" line per vertex, one 1-based "f a b c d" line
// per quad. Fixed 17-digit formatting, so equal meshes give equal bytes.
std::string obj_text(const QuadMesh& m);

// Legacy ASCII VTK unstructured grid of VTK_QUAD cells.
std::string vtk_text(const QuadMesh& m, const std::string& title = "quad mesh");

// Quads as outlined polygons. Interior irregular vertices get a filled dot
// colored by index (+1 blue, -1 red, -2 and below purple); overlay entries
// are drawn as green crosses on top. An empty mesh gives an empty page.
std::string svg_text(const QuadMesh& m, const std::vector<Singularity>& overlay = {});

// Sizing-triangulation dump for field debugging: per-vertex scalars H and
// size, one per-triangle direction glyph vector for the cross field.
std::string tri_field_vtk(const TriMesh& mesh, const CrossField& field,
                          const std::vector<double>& H, const std::vector<double>& size,
                          const std::string& title = "cross field");

// Detected singularities as VTK points with an index scalar.
std::string singularities_vtk(const std::vector<Singularity>& sings);

// Per-face and total run statistics:
// {faces:[{id, method, n_vert, n_quad, sicn_min, sicn_avg, irregular_init,
//          irregular_final, cavity_trials, acceptance_rate, time_init_ms,
//          time_improve_ms}],
//  totals:{n_vert, n_quad, sicn_min, sicn_avg, irregular_init,
//          irregular_final, time_total_ms}}
// Keys are emitted sorted, so equal runs give equal bytes apart from the
// time_* fields.
std::string stats_json(const PipelineResult& result);

// Throws std::runtime_error when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

// Log level from QUASIQUAD_LOG (0 = silent default, 1 = info, 2 = debug).
int log_level();
void log_line(int level, const std::string& msg);

}  // namespace quasiquad
