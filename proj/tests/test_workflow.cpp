#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "geovan/errors.hpp"
#include "geovan/harness.hpp"
#include "geovan/io.hpp"
#include "geovan/workflow.hpp"
#include "test_support.hpp"

using namespace geovan;
using namespace geovan::workflow;
namespace fs = std::filesystem;

namespace {

harness::Scene make_scene(std::uint64_t seed = 3) {
  return harness::generate_scene(harness::intersection_scene(seed));
}

World build_world(const harness::Scene& scene) {
  World w;
  w.add_geog_constructs(scene.network);
  w.add_video(scene.camera, scene.detections);
  return w;
}

}  // namespace

TEST_CASE("declarative calls do no work") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car") && (predicate::distance(car, w.camera()) < 50.0) &&
           predicate::contains(ConstructType::Intersection, car));

  CHECK_FALSE(w.counters().any());  // building and filtering stay lazy
  auto plan = w.plan();             // planning too
  CHECK_FALSE(w.counters().any());
  CHECK(plan.has(planner::StepKind::RoadVisibilityPrune));

  auto result = w.get_objects();
  CHECK(w.counters().any());
  CHECK(w.counters().frames_decoded > 0);
  CHECK(result.stats.counters.frames_decoded > 0);
}

TEST_CASE("counters accumulate across observations") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car"));

  auto r1 = w.get_objects();
  const auto first = w.counters().frames_decoded;
  auto r2 = w.get_objects();
  CHECK(w.counters().frames_decoded == 2 * first);
  CHECK(r1.stats.counters.frames_decoded == first);
  CHECK(r2.stats.counters.frames_decoded == first);  // per-run snapshot
}

TEST_CASE("a second road network is rejected") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  CHECK_THROWS_AS(w.add_geog_constructs(scene.network), DuplicateRoadNetwork);
}

TEST_CASE("detections must reference camera frames") {
  harness::Scene scene = make_scene();
  World w;
  w.add_geog_constructs(scene.network);
  std::vector<Detection> bad = {{9999, BBox{0, 0, 10, 10}, "car", 0.9, {}}};
  CHECK_THROWS_AS(w.add_video(scene.camera, bad), FrameMismatch);
}

TEST_CASE("boxes are clamped to the image, fully outside is an error") {
  harness::Scene scene = make_scene();
  const double W = scene.camera.frames[0].width;

  World w;
  std::vector<Detection> partial = {{0, BBox{W - 10.0, 100.0, W + 50.0, 160.0}, "car", 0.9, {}}};
  w.add_video(scene.camera, partial);

  World w2;
  std::vector<Detection> outside = {{0, BBox{W + 10.0, 100.0, W + 60.0, 160.0}, "car", 0.9, {}}};
  CHECK_THROWS_AS(w2.add_video(scene.camera, outside), InvariantViolation);
}

TEST_CASE("filters may only use declared objects") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  predicate::ObjectRef ghost{"ghost"};
  CHECK_THROWS_AS(w.filter(predicate::type_eq(ghost, "car")), UnknownReference);

  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car"));  // fine

  // Auto-named objects are declared implicitly.
  auto other = w.object();
  w.filter(predicate::distance(car, other) >= 0.0);
}

TEST_CASE("filter calls conjoin") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car"));
  w.filter(predicate::distance(car, w.camera()) < 50.0);

  auto plan = w.plan();
  REQUIRE(plan.distance_bound.has_value());
  CHECK(*plan.distance_bound == doctest::Approx(50.0));
  REQUIRE(plan.relevant_types.has_value());
  CHECK(*plan.relevant_types == std::set<std::string>{"car"});
}

TEST_CASE("observation returns matched objects and a frame manifest") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car") && (predicate::distance(car, w.camera()) < 50.0) &&
           predicate::contains(ConstructType::Intersection, car));

  auto result = w.get_objects();
  CHECK(result.objects.size() >= 1);
  for (const MovableObject& o : result.objects) CHECK(o.object_type == "car");

  REQUIRE(result.manifest.size() == 1);
  REQUIRE(result.matches.size() == 1);
  CHECK(result.manifest[0].camera_id == scene.camera.camera_id);
  CHECK_FALSE(result.matches[0].matches.empty());

  // Manifest frames mirror the matches exactly (no padding requested).
  std::set<FrameIndex> matched;
  for (const auto& m : result.matches[0].matches) matched.insert(m.frame);
  CHECK(result.manifest[0].frames.size() == matched.size());
  for (const auto& mf : result.manifest[0].frames) {
    CHECK(matched.count(mf.frame) == 1);
    CHECK_FALSE(mf.context_only);
    CHECK_FALSE(mf.tuples.empty());
  }

  // Every matched oid refers to a returned object.
  std::set<std::string> oids;
  for (const MovableObject& o : result.objects) oids.insert(o.oid);
  for (const auto& m : result.matches[0].matches)
    for (const std::string& oid : m.oids) CHECK(oids.count(oid) == 1);

  // Stats describe the one video.
  REQUIRE(result.stats.videos.size() == 1);
  const VideoStats& vs = result.stats.videos[0];
  CHECK(vs.frames_total == scene.camera.frame_count());
  CHECK(vs.matches == static_cast<std::int64_t>(result.matches[0].matches.size()));
  CHECK(vs.frames_sampled == static_cast<std::int64_t>(vs.sampled_frames.size()));
  CHECK_FALSE(vs.steps.empty());
}

TEST_CASE("an unfiltered world returns every tracked object") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto result = w.get_objects();
  CHECK(result.objects.size() >= 3);  // cars, truck, pedestrian
  std::set<std::string> types;
  for (const MovableObject& o : result.objects) types.insert(o.object_type);
  CHECK(types.count("car") == 1);
  CHECK(types.count("human") == 1);
}

TEST_CASE("disabled optimizations change work, not matches") {
  harness::Scene scene = make_scene();

  const auto run = [&scene](bool optimized) {
    World w = build_world(scene);
    if (!optimized) w.options().toggles = planner::OptimizationToggles::none();
    auto car = w.object("car1");
    w.filter(predicate::type_eq(car, "car") && (predicate::distance(car, w.camera()) < 50.0) &&
             predicate::contains(ConstructType::Intersection, car));
    return w.get_objects();
  };

  auto base = run(false);
  auto fast = run(true);

  // The optimized run processes no more detections than the baseline.
  CHECK(fast.stats.counters.detections_after_type_prune <=
        base.stats.counters.detections_after_type_prune);
  CHECK(fast.stats.counters.frames_tracked <= base.stats.counters.frames_tracked);

  // Sampling can only drop matched frames, never invent them.
  std::set<FrameIndex> base_frames, fast_frames;
  for (const auto& m : base.matches[0].matches) base_frames.insert(m.frame);
  for (const auto& m : fast.matches[0].matches) fast_frames.insert(m.frame);
  CHECK_FALSE(fast_frames.empty());
  for (FrameIndex f : fast_frames) CHECK(base_frames.count(f) == 1);
}

TEST_CASE("multiple videos observe in camera id order") {
  harness::Scene a = make_scene(3);
  harness::Scene b = harness::generate_scene([] {
    harness::SceneSpec spec = harness::intersection_scene(4);
    spec.camera_id = "aaa_cam";
    return spec;
  }());

  World w;
  w.add_geog_constructs(a.network);
  w.add_video(a.camera, a.detections);
  w.add_video(b.camera, b.detections);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car"));

  auto result = w.get_objects();
  REQUIRE(result.stats.videos.size() == 2);
  CHECK(result.stats.videos[0].camera_id == "aaa_cam");
  CHECK(result.stats.videos[1].camera_id == "cam0");
  REQUIRE(result.manifest.size() == 2);
  CHECK(result.manifest[0].camera_id == "aaa_cam");

  // oids are namespaced per video.
  bool saw_aaa = false, saw_cam0 = false;
  for (const MovableObject& o : result.objects) {
    if (o.oid.rfind("aaa_cam:", 0) == 0) saw_aaa = true;
    if (o.oid.rfind("cam0:", 0) == 0) saw_cam0 = true;
  }
  CHECK(saw_aaa);
  CHECK(saw_cam0);
}

TEST_CASE("save_frames writes a manifest and annotated frames") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.filter(predicate::type_eq(car, "car") && (predicate::distance(car, w.camera()) < 50.0) &&
           predicate::contains(ConstructType::Intersection, car));

  const fs::path out = fs::temp_directory_path() / "geovan_test_frames";
  fs::remove_all(out);
  SaveFramesOptions opts;
  opts.out_dir = out.string();
  opts.padding = 2;
  auto result = w.save_frames(opts);

  CHECK(fs::exists(out / "manifest.json"));

  // Context frames appear only in padding mode and carry no tuples.
  const VideoManifest& man = result.manifest[0];
  std::size_t context = 0, matched = 0;
  for (const auto& mf : man.frames) {
    if (mf.context_only) {
      ++context;
      CHECK(mf.tuples.empty());
    } else {
      ++matched;
    }
    char fname[32];
    std::snprintf(fname, sizeof(fname), "frame_%06lld.ppm", static_cast<long long>(mf.frame));
    CHECK(fs::exists(out / man.camera_id / fname));
  }
  CHECK(matched > 0);
  CHECK(context > 0);

  // Frames are listed in order without duplicates.
  for (std::size_t i = 1; i < man.frames.size(); ++i)
    CHECK(man.frames[i].frame > man.frames[i - 1].frame);

  // One annotated frame decodes as a valid image with some green pixels.
  const ManifestFrame* first_match = nullptr;
  for (const auto& mf : man.frames)
    if (!mf.context_only) {
      first_match = &mf;
      break;
    }
  REQUIRE(first_match != nullptr);
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%06lld.ppm", static_cast<long long>(first_match->frame));
  io::ImageRGB img = io::read_ppm((out / man.camera_id / name).string());
  CHECK(img.width == scene.camera.frames[0].width);
  CHECK(img.height == scene.camera.frames[0].height);
  bool green = false;
  for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
    if (img.pixels[i] == 60 && img.pixels[i + 1] == 220 && img.pixels[i + 2] == 60) {
      green = true;
      break;
    }
  }
  CHECK(green);

  fs::remove_all(out);
}

TEST_CASE("user hooks run inside observation") {
  harness::Scene scene = make_scene();
  World w = build_world(scene);
  auto car = w.object("car1");
  w.register_user_fn("close_enough", [](const predicate::EvalContext& ctx) {
    const MovableObject* o = ctx.objects->at("car1");
    const ObjectSample* s = o->sample_at(ctx.frame);
    return s && (s->location - ctx.camera->translation).norm() < 40.0;
  });
  w.filter(predicate::type_eq(car, "car") && predicate::user_fn("close_enough"));

  auto plan = w.plan();
  CHECK_FALSE(plan.has(planner::StepKind::ObjectTypePrune));  // hooks disable pruning

  auto result = w.get_objects();
  for (const MovableObject& o : result.objects) CHECK(o.object_type == "car");
  CHECK_FALSE(result.matches[0].matches.empty());
}

TEST_CASE("query variables default to declaration order") {
  harness::Scene scene = make_scene();

  // No filter: a single implicit variable returns everything.
  World w1 = build_world(scene);
  auto r1 = w1.get_objects();
  CHECK(r1.objects.size() >= 1);
  for (const auto& m : r1.matches[0].matches) CHECK(m.oids.size() == 1);

  // With a user hook the declared objects define the tuple shape.
  World w2 = build_world(scene);
  auto a = w2.object("a");
  auto b = w2.object("b");
  w2.register_user_fn("never", [](const predicate::EvalContext&) { return false; });
  w2.filter(predicate::user_fn("never") && predicate::type_eq(a, "car") &&
            predicate::type_eq(b, "car"));
  auto r2 = w2.get_objects();
  CHECK(r2.matches[0].matches.empty());
  CHECK(r2.objects.empty());
}
