#include "geovan/harness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "geovan/errors.hpp"
#include "geovan/geometry.hpp"
#include "geovan/rng.hpp"
#include "geovan/tracker.hpp"

namespace geovan::harness {

Quaternion camera_rotation(double yaw_deg, double pitch_deg) {
  const double kDeg = std::acos(-1.0) / 180.0;
  const double cy = std::cos(yaw_deg * kDeg), sy = std::sin(yaw_deg * kDeg);
  const double cp = std::cos(pitch_deg * kDeg), sp = std::sin(pitch_deg * kDeg);

  // Camera axes in world coordinates: Z forward (tilted down by pitch),
  // X right (horizontal), Y = Z x X pointing down.
  const Eigen::Vector3d forward(cy * cp, sy * cp, -sp);
  const Eigen::Vector3d right(sy, -cy, 0.0);
  const Eigen::Vector3d down = forward.cross(right);

  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  const Eigen::Quaterniond q(r);
  return {q.w(), q.x(), q.y(), q.z()};
}

Vec3 object_extent(const std::string& type) {
  if (type == "car") return {4.5, 1.8, 1.5};
  if (type == "truck") return {8.0, 2.5, 3.2};
  if (type == "bus") return {12.0, 2.5, 3.0};
  if (type == "human" || type == "pedestrian") return {0.5, 0.5, 1.7};
  if (type == "bicycle") return {1.8, 0.6, 1.2};
  if (type == "motorcycle") return {2.1, 0.8, 1.3};
  return {1.0, 1.0, 1.0};
}

namespace {

Vec2 lerp_waypoints(const std::vector<std::pair<double, Vec2>>& wp, double t) {
  if (t <= wp.front().first) return wp.front().second;
  if (t >= wp.back().first) return wp.back().second;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    if (t <= wp[i].first) {
      const double span = wp[i].first - wp[i - 1].first;
      const double a = span > 0.0 ? (t - wp[i - 1].first) / span : 1.0;
      return wp[i - 1].second + (wp[i].second - wp[i - 1].second) * a;
    }
  }
  return wp.back().second;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  if (!(spec.fps > 0.0)) throw InvariantViolation("scene fps must be positive");
  Scene s;
  s.spec = spec;
  SplitMix64 rng(spec.seed);

  const int n = std::max(1, static_cast<int>(std::llround(spec.duration_s * spec.fps)));

  std::vector<std::pair<double, double>> schedule = spec.camera.yaw_schedule;
  std::sort(schedule.begin(), schedule.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  CameraConfig cam;
  cam.camera_id = spec.camera_id;
  cam.frames.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = spec.t0 + i / spec.fps;
    double yaw = spec.camera.yaw_deg;
    for (const auto& [from, value] : schedule)
      if (t >= from - 1e-9) yaw = value;
    CameraFrame f;
    f.frame_index = i;
    f.translation = spec.camera.position;
    f.rotation = camera_rotation(yaw, spec.camera.pitch_deg);
    f.intrinsic = spec.camera.intrinsic;
    f.timestamp = t;
    f.width = spec.camera.width;
    f.height = spec.camera.height;
    cam.frames.push_back(f);
  }

  s.network = RoadNetwork(spec.constructs);
  s.det_to_gt.resize(n);

  s.ground_truth.reserve(spec.objects.size());
  for (const ObjectSpec& o : spec.objects) {
    if (o.waypoints.empty())
      throw InvariantViolation("object " + o.oid + " needs at least one waypoint");
    MovableObject gt;
    gt.oid = o.oid;
    gt.object_type = o.type;
    s.ground_truth.push_back(std::move(gt));
  }

  for (int i = 0; i < n; ++i) {
    const CameraFrame& f = cam.frames[i];
    for (std::size_t j = 0; j < spec.objects.size(); ++j) {
      const ObjectSpec& o = spec.objects[j];
      const double t = f.timestamp;
      if (t < o.waypoints.front().first - 1e-9 || t > o.waypoints.back().first + 1e-9) continue;
      const Vec2 p2 = lerp_waypoints(o.waypoints, t);
      const Vec3 p{p2.x, p2.y, 0.0};
      ObjectSample sample{i, t, BBox{}, p};

      // The box is sized from the object's physical extent at the projected
      // depth, anchored so its bottom-center pixel is exactly the ground
      // point's image.
      const auto wp = geometry::world_to_pixel(p, f);
      if (wp && wp->depth >= spec.min_depth) {
        const Vec3 ext = object_extent(o.type);
        const double w_px = f.intrinsic.fx * ext.y / wp->depth;
        const double h_px = f.intrinsic.fy * ext.z / wp->depth;
        BBox box{wp->pixel.u - w_px / 2.0, wp->pixel.v - h_px, wp->pixel.u + w_px / 2.0,
                 wp->pixel.v};
        if (box.x1 >= 0.0 && box.y1 >= 0.0 && box.x2 <= f.width && box.y2 <= f.height &&
            w_px > 1.0 && h_px > 1.0) {
          if (spec.pixel_noise > 0.0) {
            const double dx = rng.uniform(-spec.pixel_noise, spec.pixel_noise);
            const double dy = rng.uniform(-spec.pixel_noise, spec.pixel_noise);
            box = {box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy};
          }
          Detection d;
          d.frame_index = i;
          d.bbox = box;
          d.class_label = o.type;
          d.confidence = 1.0;
          d.depth_hint = wp->depth;
          s.detections.push_back(std::move(d));
          s.det_to_gt[i].push_back(static_cast<int>(j));
          sample.bbox = box;
        }
      }
      s.ground_truth[j].samples.push_back(std::move(sample));
    }
  }
  s.camera = std::move(cam);
  return s;
}

std::vector<MovableObject> detected_truth(const Scene& scene) {
  std::vector<MovableObject> out(scene.ground_truth.size());
  for (std::size_t j = 0; j < scene.ground_truth.size(); ++j) {
    out[j].oid = scene.ground_truth[j].oid;
    out[j].object_type = scene.ground_truth[j].object_type;
  }
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < scene.det_to_gt.size(); ++i) {
    for (const int j : scene.det_to_gt[i]) {
      const Detection& d = scene.detections[cursor++];
      const ObjectSample* gt = scene.ground_truth[j].sample_at(static_cast<FrameIndex>(i));
      out[j].samples.push_back(
          {static_cast<FrameIndex>(i), gt ? gt->timestamp : 0.0, d.bbox, gt ? gt->location : Vec3{}});
    }
  }
  return out;
}

namespace {

GeographicConstruct rect_construct(std::string id, ConstructType type, double x1, double y1,
                                   double x2, double y2, std::vector<double> headings) {
  GeographicConstruct c;
  c.construct_id = std::move(id);
  c.type = type;
  c.polygon = {{x1, y1}, {x2, y1}, {x2, y2}, {x1, y2}};
  c.headings = std::move(headings);
  return c;
}

std::vector<GeographicConstruct> crossroads(double wl, double arm, double h) {
  return {
      rect_construct("lane_e", ConstructType::Lane, h, -wl, h + arm, wl, {180.0}),
      rect_construct("lane_w", ConstructType::Lane, -h - arm, -wl, -h, wl, {180.0}),
      rect_construct("lane_n", ConstructType::Lane, -wl, h, wl, h + arm, {270.0}),
      rect_construct("lane_s", ConstructType::Lane, -wl, -h - arm, wl, -h, {90.0}),
      rect_construct("ix", ConstructType::Intersection, -h, -h, h, h, {}),
      rect_construct("rs_ew", ConstructType::RoadSection, -h - arm, -wl, h + arm, wl,
                     {0.0, 180.0}),
  };
}

}  // namespace

SceneSpec straight_lane_scene(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.camera.position = {-30.0, 6.0, 2.5};
  s.camera.yaw_deg = 0.0;
  s.camera.pitch_deg = 8.0;
  s.constructs = {
      rect_construct("lane_main", ConstructType::Lane, -60.0, -2.0, 60.0, 2.0, {180.0}),
      rect_construct("rs_main", ConstructType::RoadSection, -60.0, -2.0, 60.0, 2.0,
                     {0.0, 180.0}),
  };
  s.objects = {{"car_1", "car", {{0.0, {55.0, 0.0}}, {20.0, {-65.0, 0.0}}}}};
  return s;
}

SceneSpec intersection_scene(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.camera.position = {-30.0, 6.0, 2.5};
  s.camera.yaw_deg = 0.0;
  s.camera.pitch_deg = 8.0;
  s.constructs = crossroads(2.0, 52.0, 8.0);
  s.objects = {
      {"car_w", "car", {{0.0, {58.0, 0.0}}, {20.0, {-102.0, 0.0}}}},      // 8 m/s westbound
      {"car_e", "car", {{0.0, {-55.0, -1.0}}, {20.0, {85.0, -1.0}}}},     // 7 m/s eastbound
      {"truck_w", "truck", {{5.0, {58.0, 1.0}}, {20.0, {-62.0, 1.0}}}},   // 8 m/s from t=5
      {"ped_1", "human", {{0.0, {20.0, 6.0}}, {20.0, {18.0, 6.0}}}},      // sidewalk stroll
  };
  return s;
}

SceneSpec pan_away_scene(std::uint64_t seed) {
  SceneSpec s = intersection_scene(seed);
  // Keep every construct east of x = -8 so the turned-away view (west) sees
  // nothing mapped, then point the camera away for 6.4 s of the 20 s video.
  std::vector<GeographicConstruct> kept;
  for (GeographicConstruct& c : s.constructs) {
    if (c.construct_id == "lane_w") continue;
    if (c.construct_id == "rs_ew")
      c = rect_construct("rs_ew", ConstructType::RoadSection, -8.0, -2.0, 60.0, 2.0,
                         {0.0, 180.0});
    kept.push_back(std::move(c));
  }
  s.constructs = std::move(kept);
  s.camera.yaw_schedule = {{0.0, 0.0}, {6.0, 180.0}, {12.4, 0.0}};
  return s;
}

SceneSpec two_car_scene(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.camera.position = {-40.0, 0.0, 3.0};
  s.camera.yaw_deg = 0.0;
  s.camera.pitch_deg = 8.0;
  s.constructs = {
      rect_construct("lane_eb", ConstructType::Lane, -30.0, -4.0, 50.0, 0.0, {0.0}),
      rect_construct("lane_wb", ConstructType::Lane, -30.0, 0.0, 50.0, 4.0, {180.0}),
      rect_construct("rs_road", ConstructType::RoadSection, -30.0, -4.0, 50.0, 4.0,
                     {0.0, 180.0}),
  };
  s.objects = {
      {"car_a", "car", {{0.0, {-25.0, -2.0}}, {20.0, {95.0, -2.0}}}},
      {"car_b", "car", {{0.0, {45.0, 2.0}}, {20.0, {-75.0, 2.0}}}},
  };
  return s;
}

SceneSpec random_scene(std::uint64_t seed) {
  SplitMix64 rng(seed ^ 0x6a09e667f3bcc908ULL);
  SceneSpec s;
  s.seed = seed;

  const double wl = rng.uniform(2.5, 4.0);
  const double arm = rng.uniform(35.0, 60.0);
  const double h = wl + rng.uniform(1.0, 3.0);
  s.constructs = crossroads(wl, arm, h);

  s.camera.position = {-(h + rng.uniform(8.0, 20.0)), wl + rng.uniform(3.0, 7.0),
                       rng.uniform(2.0, 4.5)};
  s.camera.yaw_deg = rng.uniform(-25.0, 10.0);
  s.camera.pitch_deg = rng.uniform(6.0, 14.0);

  const int count = 5 + static_cast<int>(rng.uniform_int(0, 3));
  for (int i = 0; i < count; ++i) {
    const double roll = rng.uniform();
    ObjectSpec o;
    o.type = roll < 0.5 ? "car" : roll < 0.65 ? "truck" : roll < 0.75 ? "bus" : "human";
    o.oid = o.type + "_" + std::to_string(i);
    if (o.type == "human") {
      const Vec2 start{rng.uniform(-15.0, 25.0), wl + rng.uniform(1.0, 4.0)};
      const Vec2 v{rng.uniform(-1.2, 1.2), rng.uniform(-0.4, 0.4)};
      o.waypoints = {{0.0, start}, {20.0, start + v * 20.0}};
    } else {
      const bool east_west = rng.bernoulli(0.5);
      const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double off = rng.uniform(-wl + 0.5, wl - 0.5);
      const double speed = rng.uniform(4.0, 9.0);
      const double t_mid = rng.uniform(3.0, 17.0);
      const auto at = [&](double t) {
        const double along = dir * speed * (t - t_mid);
        return east_west ? Vec2{along, off} : Vec2{off, along};
      };
      o.waypoints = {{0.0, at(0.0)}, {20.0, at(20.0)}};
    }
    s.objects.push_back(std::move(o));
  }
  return s;
}

double frame_output_accuracy(const std::set<FrameIndex>& reference,
                             const std::set<FrameIndex>& candidate, FrameIndex total_frames) {
  if (total_frames <= 0) return 1.0;
  std::int64_t differing = 0;
  for (const FrameIndex f : reference)
    if (!candidate.count(f)) ++differing;
  for (const FrameIndex f : candidate)
    if (!reference.count(f)) ++differing;
  return static_cast<double>(total_frames - differing) / static_cast<double>(total_frames);
}

double association_accuracy(std::span<const MovableObject> truth,
                            std::span<const MovableObject> predicted,
                            const std::set<FrameIndex>* frames) {
  struct FrameEntry {
    std::vector<std::pair<std::size_t, const ObjectSample*>> truth;     // truth index
    std::vector<std::pair<const MovableObject*, const ObjectSample*>> pred;
  };
  std::map<FrameIndex, FrameEntry> per_frame;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (const ObjectSample& sm : truth[i].samples) {
      if (frames && !frames->count(sm.frame_index)) continue;
      if (sm.bbox.area() <= 0.0) continue;
      per_frame[sm.frame_index].truth.push_back({i, &sm});
    }
  for (const MovableObject& o : predicted)
    for (const ObjectSample& sm : o.samples) {
      if (frames && !frames->count(sm.frame_index)) continue;
      per_frame[sm.frame_index].pred.push_back({&o, &sm});
    }

  // Per frame, one-to-one truth-prediction matching by best IoU >= 0.5.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::map<std::pair<std::size_t, FrameIndex>, const MovableObject*> assigned;
  for (const auto& [frame, entry] : per_frame) {
    if (entry.truth.empty() || entry.pred.empty()) continue;
    std::vector<std::vector<double>> cost(entry.truth.size(),
                                          std::vector<double>(entry.pred.size()));
    for (std::size_t a = 0; a < entry.truth.size(); ++a)
      for (std::size_t b = 0; b < entry.pred.size(); ++b) {
        const double ov = iou(entry.truth[a].second->bbox, entry.pred[b].second->bbox);
        cost[a][b] = ov < 0.5 ? kInf : 1.0 - ov;
      }
    const std::vector<int> match = tracker::hungarian(cost);
    for (std::size_t a = 0; a < match.size(); ++a)
      if (match[a] >= 0)
        assigned[{entry.truth[a].first, frame}] = entry.pred[match[a]].first;
  }

  std::int64_t total = 0, together = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<FrameIndex> fs;
    for (const ObjectSample& sm : truth[i].samples) {
      if (frames && !frames->count(sm.frame_index)) continue;
      if (sm.bbox.area() <= 0.0) continue;
      fs.push_back(sm.frame_index);
    }
    for (std::size_t a = 0; a < fs.size(); ++a)
      for (std::size_t b = a + 1; b < fs.size(); ++b) {
        ++total;
        const auto ia = assigned.find({i, fs[a]});
        const auto ib = assigned.find({i, fs[b]});
        if (ia != assigned.end() && ib != assigned.end() && ia->second == ib->second) ++together;
      }
  }
  return total == 0 ? 1.0 : static_cast<double>(together) / static_cast<double>(total);
}

std::vector<query::QueryMatch> oracle_matches(const Scene& scene, const predicate::Pred& p,
                                              std::span<const std::string> vars,
                                              int heading_window) {
  const std::vector<MovableObject> truth = detected_truth(scene);
  query::QueryConfig cfg;
  cfg.heading_window = heading_window;
  return query::execute_query(truth, scene.camera, &scene.network, p, vars, nullptr, nullptr,
                              cfg);
}

namespace {

struct SetupSpec {
  const char* name;
  planner::OptimizationToggles toggles;
};

constexpr SetupSpec kSetups[] = {
    {"SB", {false, false, false, false}}, {"S1", {true, false, false, false}},
    {"S2", {false, true, false, false}},  {"S3", {false, false, true, false}},
    {"S4", {false, false, false, true}},  {"S5", {true, true, true, false}},
    {"S6", {true, true, true, true}},
};

}  // namespace

AblationReport run_ablation(const RoadNetwork& network, std::span<const VideoInput> videos,
                            const predicate::Pred& p, std::span<const std::string> vars,
                            const planner::PlannerOptions& base) {
  AblationReport rep;
  std::vector<MovableObject> baseline_objects;
  std::set<FrameIndex> baseline_matched;

  for (const SetupSpec& setup : kSetups) {
    workflow::World w;
    w.options() = base;
    w.options().toggles = setup.toggles;
    w.add_geog_constructs(network);
    for (const VideoInput& v : videos) w.add_video(v.camera, v.detections);
    for (const std::string& name : vars) w.object(name);
    if (!p.empty()) w.filter(p);

    const auto t0 = std::chrono::steady_clock::now();
    workflow::ObserveResult res = w.get_objects();
    const auto t1 = std::chrono::steady_clock::now();

    SetupResult r;
    r.name = setup.name;
    r.counters = res.stats.counters;
    r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    std::int64_t frames_total = 0, candidates = 0, sampled = 0;
    for (const workflow::VideoStats& vs : res.stats.videos) {
      frames_total += vs.frames_total;
      candidates += vs.frames_after_visibility;
      sampled += vs.frames_sampled;
      r.matches += vs.matches;
      r.sampled_frames.insert(vs.sampled_frames.begin(), vs.sampled_frames.end());
    }
    r.skipping_ratio =
        candidates == 0 ? 0.0
                        : 1.0 - static_cast<double>(sampled) / static_cast<double>(candidates);
    for (const workflow::VideoMatches& vm : res.matches)
      for (const query::QueryMatch& m : vm.matches) r.matched_frames.insert(m.frame);

    if (rep.setups.empty()) {
      rep.frames_total = frames_total;
      baseline_objects = res.objects;
      baseline_matched = r.matched_frames;
      r.frame_accuracy = 1.0;
      r.association = 1.0;
    } else {
      r.frame_accuracy =
          frame_output_accuracy(baseline_matched, r.matched_frames, rep.frames_total);
      r.association = association_accuracy(baseline_objects, res.objects, &r.sampled_frames);
    }
    rep.setups.push_back(std::move(r));
  }
  return rep;
}

std::string format_ablation(const AblationReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-5s %10s %12s %11s %9s %8s %10s %7s %9s\n", "setup",
                "frames_dec", "det_ingested", "det_tracked", "sampled", "matches", "frame_acc",
                "assoc", "ms");
  out += line;
  for (const SetupResult& r : report.setups) {
    std::snprintf(line, sizeof(line), "%-5s %10lld %12lld %11lld %9lld %8lld %10.4f %7.4f %9.2f\n",
                  r.name.c_str(), static_cast<long long>(r.counters.frames_decoded),
                  static_cast<long long>(r.counters.detections_ingested),
                  static_cast<long long>(r.counters.detections_tracked),
                  static_cast<long long>(r.counters.frames_sampled),
                  static_cast<long long>(r.matches), r.frame_accuracy, r.association,
                  r.runtime_ms);
    out += line;
  }
  return out;
}

}  // namespace geovan::harness
