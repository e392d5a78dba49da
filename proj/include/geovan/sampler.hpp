#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geovan/road_network.hpp"
#include "geovan/types.hpp"

namespace geovan::sampler {

struct SamplerConfig {
  // Assumed travel speed for exit prediction, 25 mph by default.
  double speed_mps = 11.176;
  // Largest allowed gap between consecutive sampled positions; nullopt or
  // values below 1 mean unbounded.
  std::optional<int> max_skip = 5;
  // Depth of the viewable area used for camera-exit prediction.
  double frustum_depth = 100.0;
  // Labels that count as road vehicles for skipping decisions.
  std::set<std::string> vehicle_types = {"bus", "car", "truck"};
};

// Smallest-area lane containing p, ties broken by construct id; nullptr when
// no lane contains it (off-road or inside an intersection).
const GeographicConstruct* lane_at(const RoadNetwork& network, Vec2 p);

struct ExitEstimate {
  Vec2 exit_point;          // where the heading ray leaves the lane polygon
  double exit_distance = 0; // meters from the current position to exit_point
  double exit_time = 0;     // epoch seconds, frames.front() time + distance / speed
  double heading_deg = 0;   // lane heading chosen (minimal exit distance)
  std::size_t frame_offset = 0;  // last position in `frames` with timestamp < exit_time
};

// Predicts when a vehicle at `location` inside `lane` leaves it, assuming it
// travels along one of the lane's headings at speed_mps. `frames` starts at
// the current frame and holds the remaining candidate frames in time order.
// Throws NoHeading when the lane has no headings and OriginOutside when the
// location is outside the lane polygon.
ExitEstimate exits_lane(const GeographicConstruct& lane, Vec2 location,
                        double speed_mps, std::span<const CameraFrame> frames);

// Position in `frames` of the last frame whose viewable area still contains
// the predicted vehicle location; frames.size() - 1 when it never leaves.
// `frames` starts at the current frame.
std::size_t exits_camera(Vec2 location, double heading_deg, double speed_mps,
                         std::span<const CameraFrame> frames, double frustum_depth);

// First position with strictly more counted vehicles than position 0, else
// the last position.
std::size_t new_car(std::span<const int> counts);

struct SampleResult {
  // Strictly increasing positions into the candidate frame list, starting
  // at 0.
  std::vector<std::size_t> positions;
  double skipping_ratio = 0.0;  // 1 - sampled / candidates
};

// Chooses which candidate frames are worth tracking. detections[i] holds the
// located detections of frames[i]; both spans run in increasing frame order.
// From each sampled frame the next one is the earliest predicted event (a
// vehicle leaving its lane or the view, or a new vehicle appearing), clamped
// to [current + 1, current + max_skip].
SampleResult sample_frames(std::span<const std::vector<LocatedDetection>> detections,
                           std::span<const CameraFrame> frames,
                           const RoadNetwork& network,
                           const SamplerConfig& cfg = {});

}  // namespace geovan::sampler
