#pragma once

#include <functional>
#include <set>

#include "quasiquad/model.hpp"
#include "quasiquad/tri_mesh.hpp"

namespace quasiquad {

// Mesh vertices of one curve, ordered from c0 to c1, endpoints included.
struct CurveChain {
  std::vector<Vec2> pts;
};

// Resamples every curve at the target spacing (per-curve hints override the
// global size) and refines until consecutive chords turn at most 30 degrees,
// down to the resolution of the input polyline.
std::vector<CurveChain> sample_curves(const PlanarModel& m, double size);

// Incremental constrained Delaunay triangulation. Four bounding-box vertices
// (ids 0..3) bootstrap the structure and are treated as ordinary points; the
// extracted mesh is exactly Delaunay among the points it keeps.
class DelaunayKernel {
 public:
  explicit DelaunayKernel(const BBox& data_box);

  struct InsertResult {
    int vertex = -1;     // existing id when rejected as duplicate
    bool inserted = false;
  };
  // Rejects duplicates within tolerance and placements that would create a
  // degenerate triangle (point exactly on a constrained edge).
  InsertResult insert(const Vec2& p);

  // Forces edge (a,b) by flipping crossing edges; throws if a constrained
  // edge or a vertex lies across the segment.
  void constrain(int a, int b);

  bool has_edge(int a, int b) const;
  bool is_constrained(int a, int b) const {
    return constrained_.count(std::minmax(a, b)) != 0;
  }

  int vertex_count() const { return static_cast<int>(points_.size()); }
  const Vec2& point(int v) const { return points_[v]; }
  bool is_super(int v) const { return v < 4; }
  double duplicate_tolerance() const { return dup_tol_; }

  std::vector<std::array<int, 3>> triangles(bool include_super = false) const;

  // Triangle ids created by the most recent successful insert().
  const std::vector<int>& last_created() const { return last_created_; }

  // Every non-constrained edge locally Delaunay (test oracle).
  bool locally_delaunay() const;

  // Containing triangle ids for region classification: walks from a hint.
  struct Tri {
    std::array<int, 3> v{-1, -1, -1};
    std::array<int, 3> adj{-1, -1, -1};  // across edge (v[k], v[k+1])
    bool alive = false;
  };
  const std::vector<Tri>& tris() const { return tris_; }

 private:
  std::vector<Vec2> points_;
  std::vector<Tri> tris_;
  std::vector<int> free_tris_;
  std::vector<int> v2t_;           // one alive incident triangle per vertex
  std::vector<int> last_created_;
  std::set<std::pair<int, int>> constrained_;
  double dup_tol_ = 0.0;
  int last_tri_ = 0;

  int new_tri();
  int locate(const Vec2& p) const;
  int edge_index(int t, int a, int b) const;
  std::vector<int> vertex_fan(int a) const;
  int find_tri_with_edge(int a, int b) const;
  void flip(int t, int k);
};

// Conforming triangulation of one face: boundary = curve chains (preserved
// exactly), interior refined until no non-constrained edge exceeds
// 1.4 * size(midpoint).
TriMesh triangulate_face(const PlanarModel& m, int face, const std::vector<CurveChain>& chains,
                         const std::function<double(const Vec2&)>& size);

// Bowyer-Watson insertion into an existing conforming mesh whose boundary
// edges act as constraints. Returns false when p is rejected (outside or
// duplicate). The mesh must be constrained-Delaunay, which every mesh built
// by this module is.
bool delaunay_insert(TriMesh& mesh, const Vec2& p);

}  // namespace quasiquad
