#include "p1fv/geometry.hpp"

#include <algorithm>

#include "p1fv/error.hpp"

namespace p1fv {

double polygon_signed_area(std::span<const Point2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * acc;
}

Point2 circumcenter(const Triangle& t) {
  // Work relative to the first vertex to limit cancellation.
  const Point2 b = t[1] - t[0];
  const Point2 c = t[2] - t[0];
  const double d = 2.0 * cross(b, c);
  const double scale = std::max({dot(b, b), dot(c, c), dot(c - b, c - b)});
  if (!(std::abs(d) > 1e-14 * scale)) {
    throw AdmissibilityError("circumcenter: degenerate (collinear) triangle");
  }
  const double bb = dot(b, b);
  const double cc = dot(c, c);
  const Point2 rel{(c.y * bb - b.y * cc) / d, (b.x * cc - c.x * bb) / d};
  return t[0] + rel;
}

double signed_line_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  return cross(ab, p - a) / norm(ab);
}

bool triangle_contains(const Triangle& ccw, Point2 p, double tol) {
  for (int e = 0; e < 3; ++e) {
    if (signed_line_distance(p, ccw[e], ccw[(e + 1) % 3]) < -tol) return false;
  }
  return true;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject,
                                std::span<const Point2> ccw_clipper) {
  std::vector<Point2> out(subject.begin(), subject.end());
  std::vector<Point2> in;
  const std::size_t m = ccw_clipper.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Point2 a = ccw_clipper[e];
    const Point2 b = ccw_clipper[(e + 1) % m];
    const Point2 ab = b - a;
    in.swap(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p = in[i];
      const Point2 q = in[(i + 1) % n];
      const double sp = cross(ab, p - a);
      const double sq = cross(ab, q - a);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double s = sp / (sp - sq);
        out.push_back(p + s * (q - p));
      }
    }
  }
  return out;
}

double triangle_overlap_area(const Triangle& a, const Triangle& b) {
  const auto poly = clip_convex(a, b);
  return std::max(0.0, polygon_signed_area(poly));
}

}  // namespace p1fv
