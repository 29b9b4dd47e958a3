#pragma once

#include <map>
#include <string>
#include <vector>

#include "quasiquad/geometry.hpp"

namespace quasiquad {

// Polyline curve between two model corners. pts runs from corner c0 to c1;
// first/last points coincide with the corners exactly.
struct ModelCurve {
  int c0 = -1;
  int c1 = -1;
  std::vector<Vec2> pts;
};

// A face is a flat list of signed 1-based curve references; +k traverses
// curve k-1 from c0 to c1, -k the reverse. Closed loops are recovered by
// walking corner closure (outer loop CCW, hole loops CW).
struct ModelFace {
  std::vector<int> curves;
};

struct PlanarModel {
  std::vector<Vec2> corners;
  std::vector<ModelCurve> curves;
  std::vector<ModelFace> faces;
  std::map<int, double> curve_size_hint;  // key: 0-based curve id
  std::map<int, int> face_quad_hint;      // key: 0-based face id

  BBox bbox() const;
};

PlanarModel load_model(const std::string& path);
PlanarModel parse_model(const std::string& json_text);

// One traversal step of a face loop.
struct CurveRef {
  int curve = -1;  // 0-based
  bool forward = true;
  int first_corner(const PlanarModel& m) const;
  int last_corner(const PlanarModel& m) const;
  std::vector<Vec2> oriented_pts(const PlanarModel& m) const;
};

using FaceLoop = std::vector<CurveRef>;

// Splits the face's curve list into closed loops; throws on broken closure.
std::vector<FaceLoop> face_loops(const PlanarModel& m, int face);

// Loop polygon with one point per polyline sample, joins deduplicated.
std::vector<Vec2> loop_polygon(const PlanarModel& m, const FaceLoop& loop);

double face_area(const PlanarModel& m, int face);
bool point_in_face(const PlanarModel& m, int face, const Vec2& p);

// Interior angle of the face at each loop corner, radians in (0, 2*pi).
// Entry i is the angle at the corner joining loop step i-1 to step i.
std::vector<double> loop_corner_angles(const PlanarModel& m, const FaceLoop& loop);

void validate_model(const PlanarModel& m);

}  // namespace quasiquad
