#include "geovan/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "geovan/errors.hpp"
#include "geovan/estimator.hpp"
#include "geovan/geometry.hpp"
#include "geovan/io.hpp"
#include "geovan/pruners.hpp"
#include "geovan/sampler.hpp"
#include "geovan/tracker.hpp"

namespace geovan::workflow {

bool WorkCounters::any() const {
  return rvp_frames_evaluated || rvp_frames_dropped || frames_decoded || frames_detected ||
         detections_ingested || detections_after_type_prune || locations_estimated ||
         detections_dropped_no_depth || frames_sampled || frames_tracked || detections_tracked ||
         predicate_evaluations;
}

void World::add_geog_constructs(RoadNetwork network) {
  if (has_network_) throw DuplicateRoadNetwork("world already holds a road network");
  network_ = std::move(network);
  has_network_ = true;
}

void World::add_video(CameraConfig camera, std::vector<Detection> detections,
                      std::string images_dir) {
  if (camera.camera_id.empty()) throw InvariantViolation("camera id must be non-empty");
  for (const VideoData& v : videos_)
    if (v.camera.camera_id == camera.camera_id)
      throw InvariantViolation("duplicate camera id " + camera.camera_id);
  if (camera.frames.empty())
    throw InvariantViolation(camera.camera_id + ": camera config has no frames");

  const FrameIndex n = camera.frame_count();
  for (FrameIndex i = 0; i < n; ++i) {
    const CameraFrame& f = camera.frames[i];
    if (f.frame_index != i)
      throw InvariantViolation(camera.camera_id + ": frame indices must be contiguous from 0");
    if (i > 0 && !(f.timestamp > camera.frames[i - 1].timestamp))
      throw InvariantViolation(camera.camera_id + ": timestamps must strictly increase");
    if (f.width <= 0 || f.height <= 0)
      throw InvariantViolation(camera.camera_id + ": frame dimensions must be positive");
    if (!(f.intrinsic.fx > 0.0) || !(f.intrinsic.fy > 0.0))
      throw InvariantViolation(camera.camera_id + ": focal lengths must be positive");
  }

  VideoData vd;
  vd.per_frame.resize(static_cast<std::size_t>(n));
  for (Detection& d : detections) {
    if (d.frame_index < 0 || d.frame_index >= n)
      throw FrameMismatch(camera.camera_id + ": detection on frame " +
                          std::to_string(d.frame_index) + " outside the camera's " +
                          std::to_string(n) + " frames");
    if (!(d.bbox.x1 < d.bbox.x2) || !(d.bbox.y1 < d.bbox.y2))
      throw InvariantViolation(camera.camera_id + ": degenerate detection box");
    const CameraFrame& f = camera.frames[d.frame_index];
    const double w = static_cast<double>(f.width);
    const double h = static_cast<double>(f.height);
    if (d.bbox.x2 <= 0.0 || d.bbox.x1 >= w || d.bbox.y2 <= 0.0 || d.bbox.y1 >= h)
      throw InvariantViolation(camera.camera_id + ": detection box fully outside the frame");
    d.bbox.x1 = std::max(d.bbox.x1, 0.0);
    d.bbox.y1 = std::max(d.bbox.y1, 0.0);
    d.bbox.x2 = std::min(d.bbox.x2, w);
    d.bbox.y2 = std::min(d.bbox.y2, h);
    if (d.depth_hint && !(*d.depth_hint > 0.0))
      throw InvariantViolation(camera.camera_id + ": depth hint must be positive");
    vd.per_frame[static_cast<std::size_t>(d.frame_index)].push_back(std::move(d));
  }
  vd.camera = std::move(camera);
  vd.images_dir = std::move(images_dir);
  videos_.push_back(std::move(vd));
}

predicate::ObjectRef World::object() { return object("o" + std::to_string(auto_names_)); }

predicate::ObjectRef World::object(std::string name) {
  if (name.empty()) throw InvariantViolation("object name must be non-empty");
  if (declared_.insert(name).second) declared_order_.push_back(name);
  ++auto_names_;
  return {std::move(name)};
}

void World::filter(const predicate::Pred& p) {
  for (const std::string& name : predicate::object_names(p))
    if (!declared_.count(name))
      throw UnknownReference("filter references undeclared object " + name);
  pred_ = pred_ && p;
}

void World::register_user_fn(std::string name, predicate::UserFnImpl fn) {
  user_fns_[std::move(name)] = std::move(fn);
}

planner::ExecutionPlan World::plan() const { return planner::make_plan(pred_, options_); }

std::vector<std::string> World::query_vars() const {
  // No filter: every tracked object is observed, one variable suffices.
  if (pred_.empty()) return {"obj"};
  // User hooks may inspect any declared object, so bind them all.
  if (predicate::has_user_fn(pred_)) {
    std::vector<std::string> v = declared_order_;
    std::sort(v.begin(), v.end());
    return v;
  }
  return predicate::object_names(pred_);
}

ObserveResult World::get_objects() { return observe(nullptr); }

ObserveResult World::save_frames(const SaveFramesOptions& opts) { return observe(&opts); }

namespace {

class StepClock {
 public:
  explicit StepClock(std::vector<StepTiming>& out) : out_(out) {}

  template <typename Fn>
  void run(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    out_.push_back({name, std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }

 private:
  std::vector<StepTiming>& out_;
};

}  // namespace

ObserveResult World::observe(const SaveFramesOptions* save) {
  const planner::ExecutionPlan exec =
      planner::make_plan(pred_, options_, predicate::StepSet::all());
  const std::vector<std::string> vars = query_vars();

  std::vector<const VideoData*> ordered;
  ordered.reserve(videos_.size());
  for (const VideoData& v : videos_) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(), [](const VideoData* a, const VideoData* b) {
    return a->camera.camera_id < b->camera.camera_id;
  });

  ObserveResult result;
  WorkCounters run;

  for (const VideoData* vd : ordered) {
    const CameraConfig& cam = vd->camera;
    const std::size_t n = cam.frames.size();

    VideoStats vs;
    vs.camera_id = cam.camera_id;
    vs.frames_total = static_cast<std::int64_t>(n);
    StepClock clock(vs.steps);

    std::vector<std::size_t> candidates;
    if (exec.has(planner::StepKind::RoadVisibilityPrune)) {
      clock.run("road_visibility_prune", [&] {
        for (std::size_t i = 0; i < n; ++i) {
          ++run.rvp_frames_evaluated;
          const auto visible =
              pruners::visible_construct_types(cam.frames[i], network_, exec.frustum_depth);
          if (pruners::rvp_keep_frame(pred_, visible))
            candidates.push_back(i);
          else
            ++run.rvp_frames_dropped;
        }
      });
    } else {
      candidates.resize(n);
      for (std::size_t i = 0; i < n; ++i) candidates[i] = i;
    }
    vs.frames_after_visibility = static_cast<std::int64_t>(candidates.size());

    // Decoding and detection happen per surviving frame; with precomputed
    // detections they reduce to work accounting and gathering.
    std::vector<std::vector<Detection>> dets(candidates.size());
    clock.run("decode+detect", [&] {
      run.frames_decoded += static_cast<std::int64_t>(candidates.size());
      run.frames_detected += static_cast<std::int64_t>(candidates.size());
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        dets[k] = vd->per_frame[candidates[k]];
        run.detections_ingested += static_cast<std::int64_t>(dets[k].size());
        vs.detections_total += static_cast<std::int64_t>(dets[k].size());
      }
    });

    if (exec.has(planner::StepKind::ObjectTypePrune) && exec.relevant_types) {
      clock.run("object_type_prune", [&] {
        for (auto& frame_dets : dets) frame_dets = pruners::otp_filter(frame_dets, *exec.relevant_types);
      });
    }
    for (const auto& frame_dets : dets)
      vs.detections_after_type += static_cast<std::int64_t>(frame_dets.size());
    run.detections_after_type_prune += vs.detections_after_type;

    std::vector<std::vector<LocatedDetection>> located(candidates.size());
    clock.run("estimate_3d", [&] {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const CameraFrame& frame = cam.frames[candidates[k]];
        for (Detection& d : dets[k]) {
          std::optional<Vec3> loc;
          if (exec.estimate_mode == planner::EstimateMode::GeometryBased) {
            const auto r = estimator::ground_point_3d(d.bbox, frame);
            if (r.status == estimator::GroundPointStatus::Ok) loc = r.point;
          }
          if (!loc && d.depth_hint) {
            const Vec2 bc = d.bbox.bottom_center();
            loc = geometry::pixel_to_world({bc.x, bc.y}, *d.depth_hint, frame);
          }
          if (!loc) {
            ++run.detections_dropped_no_depth;
            ++vs.detections_dropped_no_depth;
            continue;
          }
          located[k].push_back({std::move(d), *loc});
          ++run.locations_estimated;
          ++vs.detections_located;
        }
      }
    });

    std::vector<std::size_t> sampled;
    if (exec.has(planner::StepKind::ExitFrameSample) && !candidates.empty()) {
      clock.run("exit_frame_sample", [&] {
        std::vector<CameraFrame> cand_frames;
        cand_frames.reserve(candidates.size());
        for (const std::size_t i : candidates) cand_frames.push_back(cam.frames[i]);
        sampler::SamplerConfig cfg;
        cfg.speed_mps = exec.speed_mps;
        cfg.max_skip = exec.max_skip;
        cfg.frustum_depth = exec.frustum_depth;
        cfg.vehicle_types = exec.vehicle_types;
        sampled = sampler::sample_frames(located, cand_frames, network_, cfg).positions;
      });
    } else {
      sampled.resize(candidates.size());
      for (std::size_t k = 0; k < candidates.size(); ++k) sampled[k] = k;
    }
    vs.sampled_frames.reserve(sampled.size());
    for (const std::size_t k : sampled)
      vs.sampled_frames.push_back(cam.frames[candidates[k]].frame_index);
    vs.frames_sampled = static_cast<std::int64_t>(sampled.size());
    vs.skipping_ratio =
        candidates.empty()
            ? 0.0
            : 1.0 - static_cast<double>(sampled.size()) / static_cast<double>(candidates.size());
    run.frames_sampled += vs.frames_sampled;

    std::vector<MovableObject> tracks;
    clock.run("track", [&] {
      std::vector<FrameIndex> frame_idx;
      std::vector<double> timestamps;
      std::vector<std::vector<LocatedDetection>> frame_dets;
      frame_idx.reserve(sampled.size());
      timestamps.reserve(sampled.size());
      frame_dets.reserve(sampled.size());
      for (const std::size_t k : sampled) {
        const CameraFrame& f = cam.frames[candidates[k]];
        frame_idx.push_back(f.frame_index);
        timestamps.push_back(f.timestamp);
        frame_dets.push_back(std::move(located[k]));
      }
      tracker::TrackerStats tstats;
      tracks = tracker::track_video(frame_idx, timestamps, frame_dets, cam.camera_id + ":", {},
                                    &tstats);
      run.frames_tracked += tstats.frames;
      run.detections_tracked += tstats.detections;
      vs.detections_tracked = tstats.detections;
      vs.tracks = static_cast<std::int64_t>(tracks.size());
    });

    std::vector<query::QueryMatch> matches;
    clock.run("query", [&] {
      query::QueryStats qstats;
      query::QueryConfig qcfg;
      qcfg.heading_window = options_.heading_window;
      matches = query::execute_query(tracks, cam, has_network_ ? &network_ : nullptr, pred_, vars,
                                     &user_fns_, &qstats, qcfg);
      run.predicate_evaluations += qstats.tuples_evaluated;
      vs.matches = static_cast<std::int64_t>(matches.size());
    });

    std::set<std::string> matched_oids;
    for (const query::QueryMatch& m : matches)
      for (const std::string& oid : m.oids) matched_oids.insert(oid);
    for (MovableObject& t : tracks)
      if (matched_oids.count(t.oid)) result.objects.push_back(std::move(t));

    VideoManifest man;
    man.camera_id = cam.camera_id;
    {
      std::map<FrameIndex, std::vector<std::vector<std::string>>> by_frame;
      for (const query::QueryMatch& m : matches) by_frame[m.frame].push_back(m.oids);

      std::set<FrameIndex> context;
      if (save && save->padding > 0) {
        const FrameIndex last = static_cast<FrameIndex>(n) - 1;
        for (const auto& [f, _] : by_frame) {
          const FrameIndex lo = std::max<FrameIndex>(0, f - save->padding);
          const FrameIndex hi = std::min<FrameIndex>(last, f + save->padding);
          for (FrameIndex g = lo; g <= hi; ++g)
            if (!by_frame.count(g)) context.insert(g);
        }
      }

      for (auto& [f, tuples] : by_frame) man.frames.push_back({f, std::move(tuples), false});
      for (const FrameIndex f : context) man.frames.push_back({f, {}, true});
      std::sort(man.frames.begin(), man.frames.end(),
                [](const ManifestFrame& a, const ManifestFrame& b) { return a.frame < b.frame; });
    }
    result.manifest.push_back(std::move(man));
    result.matches.push_back({cam.camera_id, std::move(matches)});
    result.stats.videos.push_back(std::move(vs));
  }

  result.stats.counters = run;
  counters_.rvp_frames_evaluated += run.rvp_frames_evaluated;
  counters_.rvp_frames_dropped += run.rvp_frames_dropped;
  counters_.frames_decoded += run.frames_decoded;
  counters_.frames_detected += run.frames_detected;
  counters_.detections_ingested += run.detections_ingested;
  counters_.detections_after_type_prune += run.detections_after_type_prune;
  counters_.locations_estimated += run.locations_estimated;
  counters_.detections_dropped_no_depth += run.detections_dropped_no_depth;
  counters_.frames_sampled += run.frames_sampled;
  counters_.frames_tracked += run.frames_tracked;
  counters_.detections_tracked += run.detections_tracked;
  counters_.predicate_evaluations += run.predicate_evaluations;

  if (save) {
    namespace fs = std::filesystem;
    fs::create_directories(save->out_dir);
    io::write_manifest_json(result, (fs::path(save->out_dir) / "manifest.json").string());

    std::map<std::string, const MovableObject*> by_oid;
    for (const MovableObject& o : result.objects) by_oid[o.oid] = &o;

    for (const VideoManifest& man : result.manifest) {
      const VideoData* vd = nullptr;
      for (const VideoData& v : videos_)
        if (v.camera.camera_id == man.camera_id) vd = &v;
      if (!vd) continue;
      const fs::path dir = fs::path(save->out_dir) / man.camera_id;
      fs::create_directories(dir);
      for (const ManifestFrame& mf : man.frames) {
        const CameraFrame& cf = vd->camera.frames[static_cast<std::size_t>(mf.frame)];
        io::ImageRGB img;
        const fs::path src = vd->images_dir.empty()
                                 ? fs::path()
                                 : fs::path(vd->images_dir) /
                                       ("frame_" + std::to_string(mf.frame) + ".ppm");
        if (!src.empty() && fs::exists(src)) {
          img = io::read_ppm(src.string());
        } else {
          img.width = cf.width;
          img.height = cf.height;
          img.pixels.assign(static_cast<std::size_t>(cf.width) * cf.height * 3, 32);
        }
        if (save->annotate) {
          for (const auto& tuple : mf.tuples) {
            for (const std::string& oid : tuple) {
              const auto it = by_oid.find(oid);
              if (it == by_oid.end()) continue;
              const ObjectSample* s = it->second->sample_at(mf.frame);
              if (s) io::draw_box(img, s->bbox, 60, 220, 60);
            }
          }
        }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06lld.ppm",
                      static_cast<long long>(mf.frame));
        io::write_ppm(img, (dir / name).string());
      }
    }
  }

  return result;
}

}  // namespace geovan::workflow
