#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geovan/types.hpp"

namespace geovan::tracker {

struct TrackerConfig {
  double iou_min = 0.1;        // association gate: pairs below this never match
  int max_age = 2;             // sampled frames a track may go unmatched before retiring
  double velocity_alpha = 0.7; // EMA weight of the newest per-frame displacement
};

// Minimum-cost assignment. An infinite cost forbids the pairing. Returns, per
// row, the assigned column or -1; min(rows, cols) pairs are assigned before
// forbidden ones are dropped.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

struct TrackerStats {
  std::int64_t frames = 0;
  std::int64_t detections = 0;
  std::int64_t cost_evaluations = 0;
  std::int64_t births = 0;
  std::int64_t retired = 0;
};

// Associates detections across sampled frames into tracks. Tracks predict
// their next box by shifting the last one with a per-frame pixel velocity
// (exponential moving average of observed displacements); candidate pairs are
// scored 1 - IoU against the prediction, with type mismatches and IoU below
// the gate forbidden. oids are `prefix` + birth ordinal.
//
// `frames`/`detections` run parallel, in increasing frame order;
// `timestamps` gives each sampled frame's time.
std::vector<MovableObject> track_video(std::span<const FrameIndex> frames,
                                       std::span<const double> timestamps,
                                       std::span<const std::vector<LocatedDetection>> detections,
                                       const std::string& oid_prefix,
                                       const TrackerConfig& cfg = {},
                                       TrackerStats* stats = nullptr);

}  // namespace geovan::tracker
