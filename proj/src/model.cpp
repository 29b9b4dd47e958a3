#include "quasiquad/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace quasiquad {

BBox PlanarModel::bbox() const {
  BBox b;
  for (const auto& c : corners) b.expand(c);
  for (const auto& cv : curves)
    for (const auto& p : cv.pts) b.expand(p);
  return b;
}

int CurveRef::first_corner(const PlanarModel& m) const {
  return forward ? m.curves[curve].c0 : m.curves[curve].c1;
}

int CurveRef::last_corner(const PlanarModel& m) const {
  return forward ? m.curves[curve].c1 : m.curves[curve].c0;
}

std::vector<Vec2> CurveRef::oriented_pts(const PlanarModel& m) const {
  std::vector<Vec2> p = m.curves[curve].pts;
  if (!forward) std::reverse(p.begin(), p.end());
  return p;
}

static CurveRef decode_ref(int signed_ref) {
  if (signed_ref == 0) throw std::runtime_error("face curve reference 0 is invalid (ids are 1-based, signed)");
  return CurveRef{std::abs(signed_ref) - 1, signed_ref > 0};
}

std::vector<FaceLoop> face_loops(const PlanarModel& m, int face) {
  const auto& refs = m.faces[face].curves;
  std::vector<FaceLoop> loops;
  FaceLoop cur;
  int loop_start = -1;
  for (int sref : refs) {
    CurveRef r = decode_ref(sref);
    if (r.curve < 0 || r.curve >= static_cast<int>(m.curves.size()))
      throw std::runtime_error("face references nonexistent curve");
    if (cur.empty()) {
      loop_start = r.first_corner(m);
    } else if (cur.back().last_corner(m) != r.first_corner(m)) {
      throw std::runtime_error("face loop not closed: consecutive curves do not share a corner");
    }
    cur.push_back(r);
    if (cur.back().last_corner(m) == loop_start) {
      loops.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) throw std::runtime_error("face loop does not close");
  if (loops.empty()) throw std::runtime_error("face has no loops");
  return loops;
}

std::vector<Vec2> loop_polygon(const PlanarModel& m, const FaceLoop& loop) {
  std::vector<Vec2> poly;
  for (const auto& r : loop) {
    auto pts = r.oriented_pts(m);
    poly.insert(poly.end(), pts.begin(), pts.end() - 1);
  }
  return poly;
}

double face_area(const PlanarModel& m, int face) {
  double a = 0.0;
  for (const auto& loop : face_loops(m, face)) a += polygon_signed_area(loop_polygon(m, loop));
  return a;
}

bool point_in_face(const PlanarModel& m, int face, const Vec2& p) {
  std::vector<std::vector<Vec2>> loops;
  for (const auto& loop : face_loops(m, face)) loops.push_back(loop_polygon(m, loop));
  return point_in_loops(p, loops);
}

std::vector<double> loop_corner_angles(const PlanarModel& m, const FaceLoop& loop) {
  size_t n = loop.size();
  std::vector<double> angles(n, 0.0);
  constexpr double kPi = 3.14159265358979323846;
  for (size_t i = 0; i < n; ++i) {
    auto prev = loop[(i + n - 1) % n].oriented_pts(m);
    auto next = loop[i].oriented_pts(m);
    Vec2 incoming = prev[prev.size() - 1] - prev[prev.size() - 2];
    Vec2 outgoing = next[1] - next[0];
    double turn = angle_between(incoming, outgoing);
    double interior = kPi - turn;
    if (interior <= 0.0) interior += 2.0 * kPi;
    if (interior > 2.0 * kPi) interior -= 2.0 * kPi;
    angles[i] = interior;
  }
  return angles;
}

void validate_model(const PlanarModel& m) {
  double tol = 1e-9 * std::max(m.bbox().diag(), 1e-300);
  for (size_t i = 0; i < m.curves.size(); ++i) {
    const auto& c = m.curves[i];
    if (c.c0 < 0 || c.c0 >= static_cast<int>(m.corners.size()) || c.c1 < 0 ||
        c.c1 >= static_cast<int>(m.corners.size()))
      throw std::runtime_error("curve endpoint corner out of range");
    if (c.pts.size() < 2) throw std::runtime_error("curve needs at least 2 points");
    if (polyline_length(c.pts) <= tol) throw std::runtime_error("zero-length curve");
    if ((c.pts.front() - m.corners[c.c0]).norm() > tol ||
        (c.pts.back() - m.corners[c.c1]).norm() > tol)
      throw std::runtime_error("curve endpoints do not coincide with corners");
  }
  for (size_t f = 0; f < m.faces.size(); ++f) {
    auto loops = face_loops(m, static_cast<int>(f));
    int positive = 0;
    for (const auto& loop : loops) {
      double a = polygon_signed_area(loop_polygon(m, loop));
      if (a > 0.0) ++positive;
    }
    if (positive != 1)
      throw std::runtime_error("face must have exactly one CCW outer loop (holes CW)");
  }
}

PlanarModel parse_model(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  PlanarModel m;
  for (const auto& c : j.at("corners")) m.corners.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  for (const auto& c : j.at("curves")) {
    ModelCurve mc;
    mc.c0 = c.at("c0").get<int>();
    mc.c1 = c.at("c1").get<int>();
    if (c.contains("pts"))
      for (const auto& p : c.at("pts")) mc.pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (mc.pts.empty()) {
      mc.pts.push_back(m.corners.at(mc.c0));
      mc.pts.push_back(m.corners.at(mc.c1));
    }
    // snap endpoints so the coincidence invariant is exact
    if (mc.c0 >= 0 && mc.c0 < static_cast<int>(m.corners.size())) mc.pts.front() = m.corners[mc.c0];
    if (mc.c1 >= 0 && mc.c1 < static_cast<int>(m.corners.size())) mc.pts.back() = m.corners[mc.c1];
    m.curves.push_back(std::move(mc));
  }
  for (const auto& f : j.at("faces")) {
    ModelFace mf;
    for (const auto& r : f) mf.curves.push_back(r.get<int>());
    m.faces.push_back(std::move(mf));
  }
  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    if (s.contains("curves"))
      for (auto it = s.at("curves").begin(); it != s.at("curves").end(); ++it)
        m.curve_size_hint[std::stoi(it.key()) - 1] = it.value().get<double>();
    if (s.contains("faces"))
      for (auto it = s.at("faces").begin(); it != s.at("faces").end(); ++it)
        m.face_quad_hint[std::stoi(it.key())] = it.value().get<int>();
  }
  validate_model(m);
  return m;
}

PlanarModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace quasiquad
