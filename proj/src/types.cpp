#include "geovan/types.hpp"

namespace geovan {

std::string_view to_string(ConstructType t) {
  switch (t) {
    case ConstructType::Lane: return "lane";
    case ConstructType::Intersection: return "intersection";
    case ConstructType::RoadSection: return "roadsection";
    case ConstructType::LaneGroup: return "lanegroup";
  }
  return "unknown";
}

std::optional<ConstructType> construct_type_from_string(std::string_view s) {
  if (s == "lane") return ConstructType::Lane;
  if (s == "intersection") return ConstructType::Intersection;
  if (s == "roadsection") return ConstructType::RoadSection;
  if (s == "lanegroup") return ConstructType::LaneGroup;
  return std::nullopt;
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

const ObjectSample* MovableObject::sample_at(FrameIndex frame) const {
  const auto it = std::lower_bound(
      samples.begin(), samples.end(), frame,
      [](const ObjectSample& s, FrameIndex f) { return s.frame_index < f; });
  if (it == samples.end() || it->frame_index != frame) return nullptr;
  return &*it;
}

}  // namespace geovan
