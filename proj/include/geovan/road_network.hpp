#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geovan/types.hpp"

namespace geovan {

// Immutable collection of geographic constructs with a uniform-grid index
// over their bounding boxes. Construction normalizes polygons to
// counterclockwise order and headings to [0, 360); after that the network is
// read-only and safe to share across threads.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  // Throws DuplicateConstructId on repeated ids and InvariantViolation when a
  // polygon has fewer than 3 vertices or self-intersects.
  explicit RoadNetwork(std::vector<GeographicConstruct> constructs);

  const std::vector<GeographicConstruct>& constructs() const { return constructs_; }
  bool empty() const { return constructs_.empty(); }

  const GeographicConstruct* by_id(const std::string& id) const;

  // Indices of every construct whose bounding box may overlap r; guaranteed a
  // superset of the exact overlap set.
  std::vector<std::uint32_t> query(const Rect& r) const;

  // Cached bounding box of a construct's polygon.
  const Rect& bounds(std::uint32_t index) const { return bounds_[index]; }

 private:
  void build_grid();
  std::pair<int, int> cell_of(Vec2 p) const;

  std::vector<GeographicConstruct> constructs_;
  std::vector<Rect> bounds_;
  std::unordered_map<std::string, std::uint32_t> by_id_;

  Rect extent_{};
  double cell_w_ = 1.0;
  double cell_h_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;
};

struct Violation {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

struct VideoInput {
  CameraConfig camera;
  std::vector<Detection> detections;
};

// Cross-checks a world's pieces and re-asserts type invariants, reporting
// every problem found instead of throwing.
ValidationReport validate_world(const RoadNetwork* network, std::span<const VideoInput> videos);

}  // namespace geovan
