#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geovan {

// Frame ordinal within one video, 0-based and contiguous.
using FrameIndex = std::int64_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

// Axis-aligned rectangle, min <= max componentwise.
struct Rect {
  Vec2 min;
  Vec2 max;

  bool overlaps(const Rect& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
  }
  Rect expanded(double pad) const { return {{min.x - pad, min.y - pad}, {max.x + pad, max.y + pad}}; }
};

// Hamilton convention, rotates camera coordinates into world coordinates.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quaternion normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Pinhole intrinsics: focal lengths must be positive, skew may be any finite value.
struct Intrinsic {
  double fx = 1.0;
  double fy = 1.0;
  double skew = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  friend bool operator==(const Intrinsic&, const Intrinsic&) = default;
};

// One video frame's pose, intrinsics and wall-clock timestamp (epoch seconds).
struct CameraFrame {
  FrameIndex frame_index = 0;
  Vec3 translation;
  Quaternion rotation;
  Intrinsic intrinsic;
  double timestamp = 0.0;
  int width = 0;
  int height = 0;
};

// Per-video camera metadata. Frame indices are contiguous from 0 and
// timestamps strictly increase.
struct CameraConfig {
  std::string camera_id;
  std::vector<CameraFrame> frames;

  FrameIndex frame_count() const { return static_cast<FrameIndex>(frames.size()); }
};

enum class ConstructType { Lane, Intersection, RoadSection, LaneGroup };

std::string_view to_string(ConstructType t);
std::optional<ConstructType> construct_type_from_string(std::string_view s);

// Polygonal road-network element on the ground plane. Headings are degrees
// counterclockwise from east in [0, 360); a curve lane carries several.
struct GeographicConstruct {
  std::string construct_id;
  ConstructType type = ConstructType::Lane;
  std::vector<Vec2> polygon;
  std::vector<double> headings;
};

// Pixel-space box, x1 < x2 and y1 < y2.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  Vec2 center() const { return {(x1 + x2) * 0.5, (y1 + y2) * 0.5}; }
  Vec2 bottom_center() const { return {(x1 + x2) * 0.5, y2}; }
};

double iou(const BBox& a, const BBox& b);

// One detector output. depth_hint, when present, is the camera-frame depth of
// the object's ground contact point in meters.
struct Detection {
  FrameIndex frame_index = 0;
  BBox bbox;
  std::string class_label;
  double confidence = 1.0;
  std::optional<double> depth_hint;
};

// A detection paired with its estimated ground position.
struct LocatedDetection {
  Detection detection;
  Vec3 location;
};

// One tracked (or ground-truth) observation of an object.
struct ObjectSample {
  FrameIndex frame_index = 0;
  double timestamp = 0.0;
  BBox bbox;
  Vec3 location;
};

// A tracked object: constant type, samples ordered by strictly increasing
// frame index.
struct MovableObject {
  std::string oid;
  std::string object_type;
  std::vector<ObjectSample> samples;

  const ObjectSample* sample_at(FrameIndex frame) const;
};

}  // namespace geovan
