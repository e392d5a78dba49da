#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geovan/planner.hpp"
#include "geovan/predicate.hpp"
#include "geovan/query.hpp"
#include "geovan/road_network.hpp"
#include "geovan/types.hpp"
#include "geovan/workflow.hpp"

namespace geovan::harness {

// Ground-truth object moving piecewise-linearly through (time, position)
// waypoints on the ground plane. It exists between the first and last time.
struct ObjectSpec {
  std::string oid;
  std::string type = "car";
  std::vector<std::pair<double, Vec2>> waypoints;
};

struct CameraSpec {
  Vec3 position{0.0, 0.0, 1.6};
  double yaw_deg = 0.0;    // 0 = facing east (+x), counterclockwise
  double pitch_deg = 10.0; // downward tilt
  // Step overrides: entry (t, yaw) applies from time t on. Empty = fixed yaw.
  std::vector<std::pair<double, double>> yaw_schedule;
  Intrinsic intrinsic{800.0, 800.0, 0.0, 800.0, 450.0};
  int width = 1600;
  int height = 900;
};

struct SceneSpec {
  std::uint64_t seed = 1;
  std::string camera_id = "cam0";
  double fps = 12.0;
  double duration_s = 20.0;
  double t0 = 0.0;
  double min_depth = 1.0;     // objects closer than this are not detected
  double pixel_noise = 0.0;   // uniform bbox shift in pixels, seeded
  CameraSpec camera;
  std::vector<GeographicConstruct> constructs;
  std::vector<ObjectSpec> objects;
};

// A generated scene: exact camera metadata, the road network, synthetic
// detections (with exact depth hints) and the ground truth they came from.
struct Scene {
  SceneSpec spec;
  CameraConfig camera;
  RoadNetwork network;
  std::vector<Detection> detections;        // frame-major, object order within a frame
  std::vector<MovableObject> ground_truth;  // full-lifetime tracks
  // det_to_gt[frame][k] = ground_truth index of the frame's k-th detection.
  std::vector<std::vector<int>> det_to_gt;
};

// Camera-to-world rotation for a yaw (counterclockwise from east) and a
// downward pitch. Camera axes: X right, Y down, Z forward.
Quaternion camera_rotation(double yaw_deg, double pitch_deg);

// Length, width, height in meters for a detector class.
Vec3 object_extent(const std::string& type);

Scene generate_scene(const SceneSpec& spec);

// Ground-truth tracks restricted to the frames where the object was actually
// detected, with the detection's box. Metric denominators use these.
std::vector<MovableObject> detected_truth(const Scene& scene);

// Canned scenes --------------------------------------------------------------

// One long straight lane passing the camera, a single car driving through.
SceneSpec straight_lane_scene(std::uint64_t seed = 1);

// Crossroads with lanes on both axes; a westbound car crossing the
// intersection, an eastbound car, a truck and a pedestrian.
SceneSpec intersection_scene(std::uint64_t seed = 1);

// Like the intersection scene, but the camera turns away from every mapped
// construct for about a third of the video.
SceneSpec pan_away_scene(std::uint64_t seed = 1);

// Two cars in opposite lanes passing each other in front of the camera.
SceneSpec two_car_scene(std::uint64_t seed = 1);

// Randomized crossroads layout, camera pose and 5..8 objects.
SceneSpec random_scene(std::uint64_t seed);

// Metrics --------------------------------------------------------------------

// |frames where both sides agree on matched/unmatched| / total_frames.
double frame_output_accuracy(const std::set<FrameIndex>& reference,
                             const std::set<FrameIndex>& candidate, FrameIndex total_frames);

// Fraction of same-object truth sample pairs whose frames land in one
// predicted track. Samples match per frame by IoU >= 0.5 (optimal one-to-one
// assignment); `frames`, when given, limits the pair universe.
double association_accuracy(std::span<const MovableObject> truth,
                            std::span<const MovableObject> predicted,
                            const std::set<FrameIndex>* frames = nullptr);

// Reference query results: the predicate evaluated over ground-truth tracks
// restricted to detected frames (exact locations, no tracking).
std::vector<query::QueryMatch> oracle_matches(const Scene& scene, const predicate::Pred& p,
                                              std::span<const std::string> vars,
                                              int heading_window = 1);

// Ablation -------------------------------------------------------------------

struct SetupResult {
  std::string name;
  workflow::WorkCounters counters;
  double runtime_ms = 0.0;
  double skipping_ratio = 0.0;
  std::set<FrameIndex> matched_frames;
  std::set<FrameIndex> sampled_frames;
  double frame_accuracy = 1.0;  // vs the no-optimization setup
  double association = 1.0;     // vs the no-optimization setup
  std::int64_t matches = 0;
};

struct AblationReport {
  std::vector<SetupResult> setups;  // SB, S1(rvp), S2(otp), S3(geo), S4(efs), S5(rvp+otp+geo), S6(all)
  std::int64_t frames_total = 0;
};

// Runs the same workflow under each optimization subset and scores every
// setup against the unoptimized baseline.
AblationReport run_ablation(const RoadNetwork& network, std::span<const VideoInput> videos,
                            const predicate::Pred& p, std::span<const std::string> vars,
                            const planner::PlannerOptions& base = {});

// Aligned text table, one row per setup.
std::string format_ablation(const AblationReport& report);

}  // namespace geovan::harness
