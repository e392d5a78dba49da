#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "geovan/types.hpp"

namespace geovan::geometry {

// Pixel coordinates: origin at the top-left image corner, u right, v down.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

// Simple polygon on the ground plane.
struct Polygon2D {
  std::vector<Vec2> vertices;
};

struct PixelDepth {
  Pixel pixel;
  double depth = 0.0;  // camera-frame z in meters
};

struct RayExit {
  Vec2 point;
  double distance = 0.0;
};

// Wraps an angle to [0, 360).
double wrap_degrees(double deg);

// World displacement per unit of camera depth for a pixel: the rotated
// inverse-intrinsic ray. pixel_to_world(p, d) == translation + ray * d.
Vec3 pixel_ray_world(Pixel p, const CameraFrame& frame);

// Back-projects a pixel at a known camera depth into world coordinates.
// Throws NonPositiveDepth when depth <= 0.
Vec3 pixel_to_world(Pixel p, double depth, const CameraFrame& frame);

// Projects a world point into the frame's pixel space. Returns nullopt when
// the point sits at or behind the camera plane (depth <= 1e-12).
std::optional<PixelDepth> world_to_pixel(const Vec3& world, const CameraFrame& frame);

// World positions of the four image corners at a fixed camera depth, in
// pixel order (0,0), (w,0), (w,h), (0,h).
std::array<Vec3, 4> frame_corners_world(const CameraFrame& frame, double depth);

// Convex hull of the camera position and the four frame corners at the given
// depth, all projected onto the ground plane. Returns nullopt when those
// points collapse to a segment (degenerate view).
std::optional<Polygon2D> viewable_area(const CameraFrame& frame, double depth);

// Degrees counterclockwise from east of the camera's forward axis projected
// onto the ground plane. Returns nullopt for a (near-)vertical camera.
std::optional<double> camera_heading(const CameraFrame& frame);

// Closed-form 4x4 inverse-intrinsic matrix, row major. Row 3 and 4 are
// (0,0,1,0) and (0,0,0,1); exposed so tests can compare it against numeric
// inversion.
std::array<double, 16> intrinsic_inverse4(const Intrinsic& k);

// Strictly convex hull in counterclockwise order. Exact duplicates are
// ignored; nullopt when fewer than 3 distinct points remain or all points are
// collinear.
std::optional<Polygon2D> convex_hull(std::span<const Vec2> points);

// Boundary-inclusive point containment for simple polygons (even-odd rule).
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);

// Nearest boundary crossing of the ray {origin + t * unit(heading), t >= 0}.
// heading is degrees counterclockwise from east. Throws OriginOutside when
// the origin is not inside the polygon.
RayExit polygon_ray_exit(Vec2 origin, double heading_deg, std::span<const Vec2> polygon);

// Endpoint-inclusive segment intersection, collinear overlap included.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

// True when two simple polygons share any point (boundary touch included).
bool polygons_overlap(std::span<const Vec2> a, std::span<const Vec2> b);

// Signed shoelace area, positive for counterclockwise orientation.
double polygon_area(std::span<const Vec2> polygon);

// True when no two non-adjacent edges intersect and no edge is degenerate.
bool polygon_is_simple(std::span<const Vec2> polygon);

Rect bounding_rect(std::span<const Vec2> points);

}  // namespace geovan::geometry
