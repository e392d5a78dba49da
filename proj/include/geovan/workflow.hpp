#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geovan/planner.hpp"
#include "geovan/predicate.hpp"
#include "geovan/query.hpp"
#include "geovan/road_network.hpp"
#include "geovan/types.hpp"

namespace geovan::workflow {

// Work performed by observation. Declarative calls (add_*, filter) never
// touch these; they stay zero until an observe runs.
struct WorkCounters {
  std::int64_t rvp_frames_evaluated = 0;
  std::int64_t rvp_frames_dropped = 0;
  std::int64_t frames_decoded = 0;
  std::int64_t frames_detected = 0;
  std::int64_t detections_ingested = 0;
  std::int64_t detections_after_type_prune = 0;
  std::int64_t locations_estimated = 0;
  std::int64_t detections_dropped_no_depth = 0;
  std::int64_t frames_sampled = 0;
  std::int64_t frames_tracked = 0;
  std::int64_t detections_tracked = 0;
  std::int64_t predicate_evaluations = 0;

  bool any() const;
};

struct StepTiming {
  std::string name;
  double ms = 0.0;
};

struct VideoStats {
  std::string camera_id;
  std::int64_t frames_total = 0;
  std::int64_t frames_after_visibility = 0;
  std::int64_t frames_sampled = 0;
  double skipping_ratio = 0.0;
  std::int64_t detections_total = 0;
  std::int64_t detections_after_type = 0;
  std::int64_t detections_located = 0;
  std::int64_t detections_dropped_no_depth = 0;
  std::int64_t detections_tracked = 0;
  std::int64_t tracks = 0;
  std::int64_t matches = 0;
  std::vector<FrameIndex> sampled_frames;  // frames the tracker actually saw
  std::vector<StepTiming> steps;
};

struct RunStats {
  std::vector<VideoStats> videos;
  WorkCounters counters;
};

struct ManifestFrame {
  FrameIndex frame = 0;
  // Matched oid tuples, one entry per query match at this frame.
  std::vector<std::vector<std::string>> tuples;
  // True for padding frames included only for context around a match.
  bool context_only = false;
};

struct VideoManifest {
  std::string camera_id;
  std::vector<ManifestFrame> frames;
};

struct VideoMatches {
  std::string camera_id;
  std::vector<query::QueryMatch> matches;
};

struct ObserveResult {
  // Matched objects with their full recovered tracks, grouped by video.
  std::vector<MovableObject> objects;
  std::vector<VideoManifest> manifest;
  std::vector<VideoMatches> matches;
  RunStats stats;
};

struct SaveFramesOptions {
  std::string out_dir;
  bool annotate = true;
  int padding = 0;  // context frames kept on each side of a match
};

// Declarative build-filter-observe workflow over one road network and any
// number of videos. Building and filtering only record intent; all geometry,
// pruning, sampling, tracking and evaluation run when an observe method is
// called. Videos are processed independently, ordered by camera id.
class World {
 public:
  World() = default;

  // Build stage -------------------------------------------------------------

  // At most one network per world; a second call throws DuplicateRoadNetwork.
  void add_geog_constructs(RoadNetwork network);

  // Camera metadata plus the per-frame detections of one video. Detections on
  // frames the camera lacks throw FrameMismatch; boxes partially outside the
  // image are clamped, fully outside throws InvariantViolation. images_dir
  // may hold frame_<n>.ppm sources for save_frames.
  void add_video(CameraConfig camera, std::vector<Detection> detections,
                 std::string images_dir = {});

  // Variable declarations used by filters.
  predicate::ObjectRef object();  // auto-named o0, o1, ...
  predicate::ObjectRef object(std::string name);
  predicate::CameraRef camera() const { return {}; }
  predicate::GeogRef geog_construct(ConstructType type) const { return {type}; }

  // Filter stage ------------------------------------------------------------

  // Conjoins p onto the current filter. Throws UnknownReference when p uses
  // an undeclared object name.
  void filter(const predicate::Pred& p);

  void register_user_fn(std::string name, predicate::UserFnImpl fn);

  planner::PlannerOptions& options() { return options_; }
  const planner::PlannerOptions& options() const { return options_; }

  // The filter's minimal execution plan (what `observe` extends and runs).
  planner::ExecutionPlan plan() const;

  const WorkCounters& counters() const { return counters_; }
  const predicate::Pred& current_filter() const { return pred_; }

  // Observe stage -----------------------------------------------------------

  // Runs the pipeline and returns every matched object with its full track,
  // plus a per-video frame manifest.
  ObserveResult get_objects();

  // Same result, and additionally writes annotated frames and the manifest
  // under opts.out_dir.
  ObserveResult save_frames(const SaveFramesOptions& opts);

 private:
  friend struct WorldAccess;

  struct VideoData {
    CameraConfig camera;
    std::vector<std::vector<Detection>> per_frame;  // indexed by frame
    std::string images_dir;
  };

  ObserveResult observe(const SaveFramesOptions* save);
  std::vector<std::string> query_vars() const;

  RoadNetwork network_;
  bool has_network_ = false;
  std::vector<VideoData> videos_;

  std::set<std::string> declared_;
  std::vector<std::string> declared_order_;
  int auto_names_ = 0;

  predicate::Pred pred_;
  std::map<std::string, predicate::UserFnImpl> user_fns_;
  planner::PlannerOptions options_;
  WorkCounters counters_;
};

}  // namespace geovan::workflow
