#include "geovan/road_network.hpp"

#include <algorithm>
#include <cmath>

#include "geovan/errors.hpp"
#include "geovan/geometry.hpp"

namespace geovan {

namespace {

constexpr int kMaxGridDim = 2048;

bool all_finite(const GeographicConstruct& c) {
  for (const Vec2& v : c.polygon) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
  }
  for (double h : c.headings) {
    if (!std::isfinite(h)) return false;
  }
  return true;
}

}  // namespace

RoadNetwork::RoadNetwork(std::vector<GeographicConstruct> constructs)
    : constructs_(std::move(constructs)) {
  for (std::uint32_t i = 0; i < constructs_.size(); ++i) {
    GeographicConstruct& c = constructs_[i];
    if (c.polygon.size() < 3) {
      throw InvariantViolation("construct '" + c.construct_id + "': polygon needs >= 3 vertices");
    }
    if (!all_finite(c)) {
      throw InvariantViolation("construct '" + c.construct_id + "': non-finite value");
    }
    if (!geometry::polygon_is_simple(c.polygon)) {
      throw InvariantViolation("construct '" + c.construct_id + "': polygon self-intersects");
    }
    if (geometry::polygon_area(c.polygon) < 0.0) {
      std::reverse(c.polygon.begin(), c.polygon.end());
    }
    for (double& h : c.headings) h = geometry::wrap_degrees(h);
    if (!by_id_.emplace(c.construct_id, i).second) {
      throw DuplicateConstructId("construct id '" + c.construct_id + "' appears twice");
    }
    bounds_.push_back(geometry::bounding_rect(c.polygon));
  }
  build_grid();
}

void RoadNetwork::build_grid() {
  if (constructs_.empty()) return;

  extent_ = bounds_[0];
  std::vector<double> diagonals;
  diagonals.reserve(bounds_.size());
  for (const Rect& b : bounds_) {
    extent_.min.x = std::min(extent_.min.x, b.min.x);
    extent_.min.y = std::min(extent_.min.y, b.min.y);
    extent_.max.x = std::max(extent_.max.x, b.max.x);
    extent_.max.y = std::max(extent_.max.y, b.max.y);
    diagonals.push_back((b.max - b.min).norm());
  }
  // Cell size: median bbox diagonal keeps typical constructs in O(1) cells.
  std::nth_element(diagonals.begin(), diagonals.begin() + diagonals.size() / 2, diagonals.end());
  double cell = diagonals[diagonals.size() / 2];
  if (!(cell > 0.0)) cell = 1.0;

  const double w = std::max(extent_.max.x - extent_.min.x, 1e-9);
  const double h = std::max(extent_.max.y - extent_.min.y, 1e-9);
  nx_ = std::clamp(static_cast<int>(std::ceil(w / cell)), 1, kMaxGridDim);
  ny_ = std::clamp(static_cast<int>(std::ceil(h / cell)), 1, kMaxGridDim);
  cell_w_ = w / nx_;
  cell_h_ = h / ny_;
  cells_.assign(static_cast<size_t>(nx_) * ny_, {});

  for (std::uint32_t i = 0; i < bounds_.size(); ++i) {
    const auto [x0, y0] = cell_of(bounds_[i].min);
    const auto [x1, y1] = cell_of(bounds_[i].max);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        cells_[static_cast<size_t>(y) * nx_ + x].push_back(i);
      }
    }
  }
}

std::pair<int, int> RoadNetwork::cell_of(Vec2 p) const {
  const int x = std::clamp(static_cast<int>((p.x - extent_.min.x) / cell_w_), 0, nx_ - 1);
  const int y = std::clamp(static_cast<int>((p.y - extent_.min.y) / cell_h_), 0, ny_ - 1);
  return {x, y};
}

const GeographicConstruct* RoadNetwork::by_id(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &constructs_[it->second];
}

std::vector<std::uint32_t> RoadNetwork::query(const Rect& r) const {
  std::vector<std::uint32_t> out;
  if (constructs_.empty()) return out;
  if (!r.overlaps(extent_)) return out;
  const auto [x0, y0] = cell_of(r.min);
  const auto [x1, y1] = cell_of(r.max);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const auto& cell = cells_[static_cast<size_t>(y) * nx_ + x];
      out.insert(out.end(), cell.begin(), cell.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ValidationReport validate_world(const RoadNetwork* network, std::span<const VideoInput> videos) {
  ValidationReport report;
  auto add = [&report](std::string where, std::string message) {
    report.violations.push_back({std::move(where), std::move(message)});
  };

  if (network != nullptr) {
    for (const GeographicConstruct& c : network->constructs()) {
      const std::string where = "construct " + c.construct_id;
      if (c.polygon.size() < 3) add(where, "polygon has fewer than 3 vertices");
      for (double h : c.headings) {
        if (!(h >= 0.0 && h < 360.0)) add(where, "heading outside [0, 360)");
      }
    }
  }

  for (const VideoInput& video : videos) {
    const std::string where = "video " + video.camera.camera_id;
    const auto& frames = video.camera.frames;
    if (frames.empty()) {
      add(where, "camera config has no frames");
      continue;
    }
    for (size_t i = 0; i < frames.size(); ++i) {
      const CameraFrame& f = frames[i];
      if (f.frame_index != static_cast<FrameIndex>(i)) {
        add(where, "frame indices not contiguous from 0");
        break;
      }
    }
    for (size_t i = 1; i < frames.size(); ++i) {
      if (!(frames[i].timestamp > frames[i - 1].timestamp)) {
        add(where, "timestamps not strictly increasing");
        break;
      }
    }
    for (const CameraFrame& f : frames) {
      if (f.width <= 0 || f.height <= 0) {
        add(where, "non-positive frame dimensions");
        break;
      }
      if (!(f.intrinsic.fx > 0.0) || !(f.intrinsic.fy > 0.0)) {
        add(where, "non-positive focal length");
        break;
      }
      if (std::abs(f.rotation.norm() - 1.0) > 1e-9) {
        add(where, "rotation quaternion not unit length");
        break;
      }
      if (!std::isfinite(f.translation.x) || !std::isfinite(f.translation.y) ||
          !std::isfinite(f.translation.z) || !std::isfinite(f.timestamp)) {
        add(where, "non-finite pose or timestamp");
        break;
      }
    }
    const FrameIndex count = video.camera.frame_count();
    for (const Detection& d : video.detections) {
      if (d.frame_index < 0 || d.frame_index >= count) {
        add(where, "detection references frame outside camera range");
        break;
      }
    }
    for (const Detection& d : video.detections) {
      if (!(d.bbox.x1 < d.bbox.x2) || !(d.bbox.y1 < d.bbox.y2)) {
        add(where, "detection bbox is empty or inverted");
        break;
      }
      if (d.depth_hint && !(*d.depth_hint > 0.0)) {
        add(where, "detection depth hint must be positive");
        break;
      }
    }
  }
  return report;
}

}  // namespace geovan
