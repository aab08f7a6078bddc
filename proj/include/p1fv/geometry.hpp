#pragma once

// Planar primitives shared by the mesh, the overlay integrals and the
// point-location helpers.

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace p1fv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
constexpr Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

using Triangle = std::array<Point2, 3>;

/// Twice the signed area; positive for counterclockwise vertex order.
constexpr double signed_area2(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline double triangle_area(const Triangle& t) {
  return 0.5 * std::abs(signed_area2(t[0], t[1], t[2]));
}

/// Shoelace area of a simple polygon (signed, CCW positive).
double polygon_signed_area(std::span<const Point2> polygon);

/// Point equidistant from the three vertices. Throws AdmissibilityError for
/// collinear input.
Point2 circumcenter(const Triangle& t);

/// Signed distance from p to the line through a->b, positive on the left.
double signed_line_distance(Point2 p, Point2 a, Point2 b);

/// Closed-triangle membership with an absolute tolerance on the
/// edge distances. The triangle must be counterclockwise.
bool triangle_contains(const Triangle& ccw, Point2 p, double tol = 0.0);

/// Sutherland-Hodgman clip of a convex polygon against a CCW convex clipper.
std::vector<Point2> clip_convex(std::span<const Point2> subject,
                                std::span<const Point2> ccw_clipper);

/// Area of the intersection of two CCW triangles.
double triangle_overlap_area(const Triangle& a, const Triangle& b);

}  // namespace p1fv
