#pragma once

#include "geovan/types.hpp"

namespace geovan::estimator {

enum class GroundPointStatus {
  Ok,
  BehindCamera,    // the plane intersection lies behind the camera
  NoIntersection,  // the ray is parallel to the plane
};

struct GroundPointResult {
  GroundPointStatus status = GroundPointStatus::NoIntersection;
  Vec3 point{};    // valid only when status == Ok
  double depth = 0;  // signed ray parameter at the plane hit
};

// Ground position of the object whose image bounding box is `bbox`: the
// bottom edge's midpoint is assumed to touch the plane dot(n, x) = c (the
// z = 0 ground plane by default). The back-projected ray is affine in depth,
// so the hit solves in closed form.
GroundPointResult ground_point_3d(const BBox& bbox, const CameraFrame& frame,
                                  Vec3 plane_normal = Vec3{0, 0, 1},
                                  double plane_c = 0.0);

}  // namespace geovan::estimator
