#include "geovan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geovan/errors.hpp"
#include "geovan/geometry.hpp"

namespace geovan::sampler {

const GeographicConstruct* lane_at(const RoadNetwork& network, Vec2 p) {
  const GeographicConstruct* best = nullptr;
  double best_area = std::numeric_limits<double>::infinity();
  for (std::uint32_t idx : network.query(Rect{p, p})) {
    const GeographicConstruct& c = network.constructs()[idx];
    if (c.type != ConstructType::Lane) continue;
    if (!geometry::point_in_polygon(p, c.polygon)) continue;
    const double a = geometry::polygon_area(c.polygon);
    if (!best || a < best_area ||
        (a == best_area && c.construct_id < best->construct_id)) {
      best = &c;
      best_area = a;
    }
  }
  return best;
}

ExitEstimate exits_lane(const GeographicConstruct& lane, Vec2 location,
                        double speed_mps, std::span<const CameraFrame> frames) {
  if (lane.headings.empty()) throw NoHeading("lane " + lane.construct_id + " has no headings");
  if (frames.empty()) throw InvariantViolation("exits_lane needs at least the current frame");
  if (!(speed_mps > 0.0)) throw InvariantViolation("speed must be positive");

  ExitEstimate best;
  bool have = false;
  for (double h : lane.headings) {
    const geometry::RayExit exit = geometry::polygon_ray_exit(location, h, lane.polygon);
    if (!have || exit.distance < best.exit_distance) {
      have = true;
      best.exit_point = exit.point;
      best.exit_distance = exit.distance;
      best.heading_deg = h;
    }
  }

  best.exit_time = frames.front().timestamp + best.exit_distance / speed_mps;
  best.frame_offset = 0;
  for (std::size_t o = frames.size(); o-- > 0;) {
    if (frames[o].timestamp < best.exit_time) {
      best.frame_offset = o;
      break;
    }
  }
  return best;
}

std::size_t exits_camera(Vec2 location, double heading_deg, double speed_mps,
                         std::span<const CameraFrame> frames, double frustum_depth) {
  if (frames.empty()) throw InvariantViolation("exits_camera needs at least the current frame");
  const double rad = heading_deg * (std::acos(-1.0) / 180.0);
  const Vec2 dir{std::cos(rad), std::sin(rad)};
  const double t0 = frames.front().timestamp;
  for (std::size_t o = 1; o < frames.size(); ++o) {
    const Vec2 pos = location + dir * (speed_mps * (frames[o].timestamp - t0));
    const auto area = geometry::viewable_area(frames[o], frustum_depth);
    if (!area || !geometry::point_in_polygon(pos, area->vertices)) return o - 1;
  }
  return frames.size() - 1;
}

std::size_t new_car(std::span<const int> counts) {
  if (counts.empty()) return 0;
  for (std::size_t o = 1; o < counts.size(); ++o)
    if (counts[o] > counts[0]) return o;
  return counts.size() - 1;
}

SampleResult sample_frames(std::span<const std::vector<LocatedDetection>> detections,
                           std::span<const CameraFrame> frames,
                           const RoadNetwork& network,
                           const SamplerConfig& cfg) {
  const std::size_t n = frames.size();
  SampleResult res;
  if (n == 0) return res;
  if (detections.size() != n)
    throw InvariantViolation("per-frame detections must parallel the candidate frames");

  std::vector<int> vehicle_counts(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (const LocatedDetection& d : detections[i])
      if (cfg.vehicle_types.count(d.detection.class_label)) ++vehicle_counts[i];

  const bool bounded = cfg.max_skip && *cfg.max_skip >= 1;

  std::size_t i = 0;
  res.positions.push_back(0);
  while (i + 1 < n) {
    std::size_t next = i + 1;
    if (vehicle_counts[i] > 0) {
      const auto remaining = frames.subspan(i);
      std::size_t earliest = i + new_car(std::span(vehicle_counts).subspan(i));
      for (const LocatedDetection& d : detections[i]) {
        if (!cfg.vehicle_types.count(d.detection.class_label)) continue;
        const Vec2 p = d.location.xy();
        std::size_t event;
        const GeographicConstruct* lane = lane_at(network, p);
        if (!lane || lane->headings.empty()) {
          // At an intersection or off the mapped lanes the heading model does
          // not apply; stay dense.
          event = i + 1;
        } else {
          const ExitEstimate ex = exits_lane(*lane, p, cfg.speed_mps, remaining);
          const std::size_t leaves_lane = i + ex.frame_offset;
          const std::size_t leaves_view =
              i + exits_camera(p, ex.heading_deg, cfg.speed_mps, remaining, cfg.frustum_depth);
          event = std::min(leaves_lane, leaves_view);
        }
        earliest = std::min(earliest, event);
      }
      next = earliest;
    }
    std::size_t hi = n - 1;
    if (bounded) hi = std::min(hi, i + static_cast<std::size_t>(*cfg.max_skip));
    next = std::clamp(next, i + 1, std::max(hi, i + 1));
    res.positions.push_back(next);
    i = next;
  }
  res.skipping_ratio = 1.0 - static_cast<double>(res.positions.size()) / static_cast<double>(n);
  return res;
}

}  // namespace geovan::sampler
