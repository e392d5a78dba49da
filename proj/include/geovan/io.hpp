#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geovan/harness.hpp"
#include "geovan/predicate.hpp"
#include "geovan/road_network.hpp"
#include "geovan/types.hpp"
#include "geovan/workflow.hpp"

// File formats. All JSON writers emit canonical output: object keys sorted,
// two-space indent, shortest round-trip float representation. Loaders throw
// ParseError with a path-prefixed message on malformed input.
namespace geovan::io {

// Camera metadata, one JSON document per video.
CameraConfig load_camera_config(const std::string& path);
void write_camera_config(const CameraConfig& camera, const std::string& path);

// Road network, one JSON document.
RoadNetwork load_road_network(const std::string& path);
void write_road_network(const RoadNetwork& network, const std::string& path);

// Detections, newline-delimited JSON (one object per line).
std::vector<Detection> load_detections(const std::string& path);
void write_detections(std::span<const Detection> detections, const std::string& path);

// Predicate expressions, e.g.
//   {"and": [{"type_eq": {"obj": "o1", "label": "car"}},
//            {"distance": {"a": "o1", "b": "@camera", "cmp": "lt", "meters": 50}}]}
// Refs are object names, or "@camera" for the camera.
predicate::Pred parse_predicate(const std::string& json_text);
std::string predicate_to_json(const predicate::Pred& p);

// Tracked objects.
std::vector<MovableObject> load_tracks(const std::string& path);
void write_tracks(std::span<const MovableObject> objects, const std::string& path);

// Observation outputs.
void write_manifest_json(const workflow::ObserveResult& result, const std::string& path);
void write_stats_json(const workflow::RunStats& stats, const std::string& path);
std::string format_stats(const workflow::RunStats& stats);  // aligned text table

// Declarative workflow description file.
struct WorkflowFile {
  std::string road_network_path;  // empty = no network
  struct Video {
    std::string camera_path;
    std::string detections_path;
    std::string images_dir;
  };
  std::vector<Video> videos;
  std::vector<std::string> objects;
  predicate::Pred filter;  // empty = no filter
  std::string observe_mode = "objects";  // "objects" | "save_frames"
  std::string out_dir;
  bool annotate = true;
  int padding = 0;
  std::optional<double> speed_mps;
  std::optional<int> max_skip;  // 0 = unbounded
  std::optional<double> frustum_depth;
  std::optional<int> heading_window;
  std::set<std::string> disabled;  // any of: rvp, otp, geo3d, efs
};
WorkflowFile load_workflow(const std::string& path);

// Writes camera.json, road_network.json, detections.ndjson and
// ground_truth.json for a generated scene.
void write_scene(const harness::Scene& scene, const std::string& dir);

// Binary PPM (P6) images, used for annotated frame output.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;  // rgb, row-major
};
ImageRGB read_ppm(const std::string& path);
void write_ppm(const ImageRGB& img, const std::string& path);
void draw_box(ImageRGB& img, const BBox& box, unsigned char r, unsigned char g, unsigned char b);

}  // namespace geovan::io
