#include "geovan/pruners.hpp"

#include "geovan/geometry.hpp"

namespace geovan::pruners {

std::set<ConstructType> visible_construct_types(const CameraFrame& frame,
                                                const RoadNetwork& network,
                                                double frustum_depth) {
  std::set<ConstructType> out;
  auto area = geometry::viewable_area(frame, frustum_depth);
  if (!area) return out;

  const Rect view_bounds = geometry::bounding_rect(area->vertices);
  for (uint32_t idx : network.query(view_bounds)) {
    const GeographicConstruct& c = network.constructs()[idx];
    if (out.count(c.type)) continue;
    if (geometry::polygons_overlap(area->vertices, c.polygon)) out.insert(c.type);
  }
  return out;
}

namespace {

bool keep_eval(const predicate::Node& node, const std::set<ConstructType>& visible) {
  using namespace predicate;
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, And>) {
          for (const auto& c : n.children)
            if (!keep_eval(*c, visible)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Or>) {
          for (const auto& c : n.children)
            if (keep_eval(*c, visible)) return true;
          return false;
        } else if constexpr (std::is_same_v<T, Not>) {
          return !keep_eval(*n.child, visible);
        } else if constexpr (std::is_same_v<T, Contains>) {
          return visible.count(n.geog) > 0;
        } else {
          return true;
        }
      },
      node.v());
}

}  // namespace

bool rvp_keep_frame(const predicate::Pred& p, const std::set<ConstructType>& visible) {
  if (p.empty()) return true;
  return keep_eval(*p.node(), visible);
}

std::vector<Detection> otp_filter(std::span<const Detection> detections,
                                  const std::set<std::string>& relevant) {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (const Detection& d : detections)
    if (relevant.count(d.class_label)) out.push_back(d);
  return out;
}

}  // namespace geovan::pruners
