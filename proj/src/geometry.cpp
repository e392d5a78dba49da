#include "geovan/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "geovan/errors.hpp"

namespace geovan::geometry {

namespace {

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

Eigen::Matrix3d rotation_of(const Quaternion& q) {
  return Eigen::Quaterniond(q.w, q.x, q.y, q.z).normalized().toRotationMatrix();
}

Eigen::Matrix3d intrinsic_matrix(const Intrinsic& k) {
  Eigen::Matrix3d m;
  m << k.fx, k.skew, k.cx,
       0.0,  k.fy,   k.cy,
       0.0,  0.0,    1.0;
  return m;
}

// Closed-form inverse of the upper-triangular intrinsic matrix.
Eigen::Matrix3d intrinsic_inverse3(const Intrinsic& k) {
  Eigen::Matrix3d m;
  m << 1.0 / k.fx, -k.skew / (k.fx * k.fy), (k.skew * k.cy - k.fy * k.cx) / (k.fx * k.fy),
       0.0,         1.0 / k.fy,             -k.cy / k.fy,
       0.0,         0.0,                     1.0;
  return m;
}

double cross3(Vec2 o, Vec2 a, Vec2 b) { return (a - o).cross(b - o); }

// Distance from p to the segment ab.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

int orient_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross3(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

bool in_box_collinear(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

double wrap_degrees(double deg) {
  double m = std::fmod(deg, 360.0);
  if (m < 0.0) m += 360.0;
  if (m >= 360.0) m = 0.0;
  return m;
}

Vec3 pixel_ray_world(Pixel p, const CameraFrame& frame) {
  const Eigen::Vector3d ray = rotation_of(frame.rotation) *
                              (intrinsic_inverse3(frame.intrinsic) * Eigen::Vector3d(p.u, p.v, 1.0));
  return {ray.x(), ray.y(), ray.z()};
}

Vec3 pixel_to_world(Pixel p, double depth, const CameraFrame& frame) {
  if (!(depth > 0.0)) throw NonPositiveDepth("pixel_to_world: depth must be > 0");
  return frame.translation + pixel_ray_world(p, frame) * depth;
}

std::optional<PixelDepth> world_to_pixel(const Vec3& world, const CameraFrame& frame) {
  const Eigen::Vector3d cam =
      rotation_of(frame.rotation).transpose() * (to_eigen(world) - to_eigen(frame.translation));
  if (cam.z() <= 1e-12) return std::nullopt;
  const Eigen::Vector3d h = intrinsic_matrix(frame.intrinsic) * cam;
  return PixelDepth{{h.x() / cam.z(), h.y() / cam.z()}, cam.z()};
}

std::array<Vec3, 4> frame_corners_world(const CameraFrame& frame, double depth) {
  const double w = static_cast<double>(frame.width);
  const double h = static_cast<double>(frame.height);
  return {pixel_to_world({0.0, 0.0}, depth, frame),
          pixel_to_world({w, 0.0}, depth, frame),
          pixel_to_world({w, h}, depth, frame),
          pixel_to_world({0.0, h}, depth, frame)};
}

std::optional<Polygon2D> viewable_area(const CameraFrame& frame, double depth) {
  const auto corners = frame_corners_world(frame, depth);
  const std::array<Vec2, 5> points = {frame.translation.xy(), corners[0].xy(), corners[1].xy(),
                                      corners[2].xy(), corners[3].xy()};
  return convex_hull(points);
}

std::optional<double> camera_heading(const CameraFrame& frame) {
  const Eigen::Vector3d forward = rotation_of(frame.rotation).col(2);
  if (std::hypot(forward.x(), forward.y()) < 1e-9) return std::nullopt;
  return wrap_degrees(std::atan2(forward.y(), forward.x()) * 180.0 / std::numbers::pi);
}

std::array<double, 16> intrinsic_inverse4(const Intrinsic& k) {
  const Eigen::Matrix3d c = intrinsic_inverse3(k);
  return {c(0, 0), c(0, 1), c(0, 2), 0.0,
          c(1, 0), c(1, 1), c(1, 2), 0.0,
          0.0,     0.0,     1.0,     0.0,
          0.0,     0.0,     0.0,     1.0};
}

std::optional<Polygon2D> convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(),
            [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  const size_t n = p.size();
  if (n < 3) return std::nullopt;

  // Andrew's monotone chain; popping on cross <= 0 keeps the hull strictly
  // convex and counterclockwise.
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross3(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross3(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  if (hull.size() < 3) return std::nullopt;
  return Polygon2D{std::move(hull)};
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  const size_t n = polygon.size();
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[j];
    const Vec2 b = polygon[i];
    if (point_segment_distance(p, a, b) <= 1e-9) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (xint > p.x) inside = !inside;
    }
  }
  return inside;
}

RayExit polygon_ray_exit(Vec2 origin, double heading_deg, std::span<const Vec2> polygon) {
  if (!point_in_polygon(origin, polygon)) {
    throw OriginOutside("polygon_ray_exit: ray origin lies outside the polygon");
  }
  const double rad = heading_deg * std::numbers::pi / 180.0;
  const Vec2 u{std::cos(rad), std::sin(rad)};

  double best = std::numeric_limits<double>::infinity();
  const size_t n = polygon.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[j];
    const Vec2 d = polygon[i] - a;
    // origin + t*u == a + s*d
    const double det = d.x * u.y - d.y * u.x;
    if (std::abs(det) < 1e-15) continue;  // parallel edge
    const Vec2 w = a - origin;
    const double t = (d.x * w.y - d.y * w.x) / det;
    const double s = (u.x * w.y - u.y * w.x) / det;
    if (t >= 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::min(best, t);
  }
  // The origin is inside, so the ray must cross the boundary; an unbounded
  // result can only come from the origin sitting exactly on an edge that the
  // ray leaves along. Treat that as an immediate exit.
  if (!std::isfinite(best)) best = 0.0;
  return RayExit{origin + u * best, best};
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orient_sign(a, b, c);
  const int o2 = orient_sign(a, b, d);
  const int o3 = orient_sign(c, d, a);
  const int o4 = orient_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && in_box_collinear(a, b, c)) return true;
  if (o2 == 0 && in_box_collinear(a, b, d)) return true;
  if (o3 == 0 && in_box_collinear(c, d, a)) return true;
  if (o4 == 0 && in_box_collinear(c, d, b)) return true;
  return false;
}

bool polygons_overlap(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) return false;
  if (!bounding_rect(a).overlaps(bounding_rect(b))) return false;
  for (const Vec2& v : a) {
    if (point_in_polygon(v, b)) return true;
  }
  for (const Vec2& v : b) {
    if (point_in_polygon(v, a)) return true;
  }
  const size_t na = a.size();
  const size_t nb = b.size();
  for (size_t i = 0, i2 = na - 1; i < na; i2 = i++) {
    for (size_t j = 0, j2 = nb - 1; j < nb; j2 = j++) {
      if (segments_intersect(a[i2], a[i], b[j2], b[j])) return true;
    }
  }
  return false;
}

double polygon_area(std::span<const Vec2> polygon) {
  const size_t n = polygon.size();
  double sum = 0.0;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    sum += polygon[j].cross(polygon[i]);
  }
  return sum * 0.5;
}

bool polygon_is_simple(std::span<const Vec2> polygon) {
  const size_t n = polygon.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if (polygon[i] == polygon[(i + 1) % n]) return false;  // degenerate edge
  }
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[(i + 1) % n];
    for (size_t j = i + 1; j < n; ++j) {
      // skip edges adjacent to edge i
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

Rect bounding_rect(std::span<const Vec2> points) {
  Rect r{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Vec2& p : points) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

}  // namespace geovan::geometry
