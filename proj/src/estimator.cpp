#include "geovan/estimator.hpp"

#include <cmath>

#include "geovan/geometry.hpp"

namespace geovan::estimator {

GroundPointResult ground_point_3d(const BBox& bbox, const CameraFrame& frame,
                                  Vec3 plane_normal, double plane_c) {
  const Vec2 bc = bbox.bottom_center();
  const Vec3 ray = geometry::pixel_ray_world({bc.x, bc.y}, frame);

  const double denom = plane_normal.dot(ray);
  if (std::abs(denom) < 1e-12) return {GroundPointStatus::NoIntersection, {}, 0.0};

  const double d = (plane_c - plane_normal.dot(frame.translation)) / denom;
  if (d <= 0.0) return {GroundPointStatus::BehindCamera, {}, d};

  Vec3 p = frame.translation + ray * d;
  if (plane_normal.x == 0.0 && plane_normal.y == 0.0) p.z = plane_c / plane_normal.z;
  return {GroundPointStatus::Ok, p, d};
}

}  // namespace geovan::estimator
