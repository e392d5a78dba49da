#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "geovan/errors.hpp"
#include "geovan/geometry.hpp"
#include "geovan/harness.hpp"
#include "geovan/query.hpp"
#include "test_support.hpp"

using namespace geovan;
using namespace geovan::harness;

TEST_CASE("scene generation is deterministic") {
  const Scene a = generate_scene(intersection_scene(5));
  const Scene b = generate_scene(intersection_scene(5));
  REQUIRE(a.detections.size() == b.detections.size());
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    CHECK(a.detections[i].frame_index == b.detections[i].frame_index);
    CHECK(a.detections[i].bbox.x1 == b.detections[i].bbox.x1);
    CHECK(a.detections[i].bbox.y2 == b.detections[i].bbox.y2);
    CHECK(a.detections[i].depth_hint == b.detections[i].depth_hint);
  }
  REQUIRE(a.camera.frames.size() == b.camera.frames.size());
  for (std::size_t i = 0; i < a.camera.frames.size(); ++i)
    CHECK(a.camera.frames[i].timestamp == b.camera.frames[i].timestamp);

  // Randomized layouts are reproducible too, and vary across seeds.
  const Scene r1 = generate_scene(random_scene(9));
  const Scene r2 = generate_scene(random_scene(9));
  const Scene r3 = generate_scene(random_scene(10));
  CHECK(r1.detections.size() == r2.detections.size());
  CHECK(r1.ground_truth.size() == r2.ground_truth.size());
  const bool differs = r1.detections.size() != r3.detections.size() ||
                       r1.ground_truth.size() != r3.ground_truth.size();
  CHECK(differs);
}

TEST_CASE("detections invert exactly to the ground point") {
  const Scene s = generate_scene(straight_lane_scene(1));
  REQUIRE(s.detections.size() > 50);

  std::size_t cursor = 0;
  for (std::size_t i = 0; i < s.det_to_gt.size(); ++i) {
    for (const int j : s.det_to_gt[i]) {
      const Detection& d = s.detections[cursor++];
      REQUIRE(d.frame_index == static_cast<FrameIndex>(i));
      REQUIRE(d.depth_hint.has_value());

      const ObjectSample* gt = s.ground_truth[j].sample_at(d.frame_index);
      REQUIRE(gt != nullptr);

      const Vec2 bc = d.bbox.bottom_center();
      const Vec3 world =
          geometry::pixel_to_world({bc.x, bc.y}, *d.depth_hint, s.camera.frames[i]);
      CHECK((world - gt->location).norm() < 1e-6);
      CHECK(std::abs(world.z) < 1e-6);
    }
  }
  CHECK(cursor == s.detections.size());
}

TEST_CASE("emission rules hold on generated detections") {
  const SceneSpec spec = intersection_scene(2);
  const Scene s = generate_scene(spec);
  FrameIndex prev = 0;
  for (const Detection& d : s.detections) {
    CHECK(d.frame_index >= prev);  // frame-major order
    prev = d.frame_index;
    REQUIRE(d.depth_hint.has_value());
    CHECK(*d.depth_hint >= spec.min_depth);
    const CameraFrame& f = s.camera.frames[d.frame_index];
    CHECK(d.bbox.x1 >= 0.0);
    CHECK(d.bbox.y1 >= 0.0);
    CHECK(d.bbox.x2 <= f.width);
    CHECK(d.bbox.y2 <= f.height);
    CHECK(d.bbox.width() > 1.0);
    CHECK(d.bbox.height() > 1.0);
  }

  // Raising the depth floor removes the close detections and nothing else.
  SceneSpec far = spec;
  far.min_depth = 40.0;
  const Scene sf = generate_scene(far);
  CHECK(sf.detections.size() < s.detections.size());
  for (const Detection& d : sf.detections) CHECK(*d.depth_hint >= 40.0);
}

TEST_CASE("det_to_gt maps detections to their source tracks") {
  const Scene s = generate_scene(intersection_scene(3));
  std::size_t total = 0;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < s.det_to_gt.size(); ++i) {
    total += s.det_to_gt[i].size();
    for (const int j : s.det_to_gt[i]) {
      REQUIRE(j >= 0);
      REQUIRE(static_cast<std::size_t>(j) < s.ground_truth.size());
      const Detection& d = s.detections[cursor++];
      CHECK(d.class_label == s.ground_truth[j].object_type);
      const ObjectSample* gt = s.ground_truth[j].sample_at(static_cast<FrameIndex>(i));
      REQUIRE(gt != nullptr);
      CHECK(gt->bbox.x1 == d.bbox.x1);  // the sample keeps the emitted box
      CHECK(gt->bbox.y2 == d.bbox.y2);
    }
  }
  CHECK(total == s.detections.size());
}

TEST_CASE("detected truth restricts tracks to seen frames") {
  const Scene s = generate_scene(intersection_scene(3));
  const std::vector<MovableObject> truth = detected_truth(s);
  REQUIRE(truth.size() == s.ground_truth.size());

  std::size_t samples = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    CHECK(truth[j].oid == s.ground_truth[j].oid);
    samples += truth[j].samples.size();
    for (const ObjectSample& sm : truth[j].samples) {
      CHECK(sm.bbox.area() > 0.0);
      const ObjectSample* gt = s.ground_truth[j].sample_at(sm.frame_index);
      REQUIRE(gt != nullptr);
      CHECK(sm.location.x == gt->location.x);
      CHECK(sm.location.y == gt->location.y);
    }
  }
  CHECK(samples == s.detections.size());
}

TEST_CASE("camera rotation composes yaw and pitch") {
  // The ray through the principal point is the camera forward axis.
  for (const auto& [yaw, pitch] : {std::pair{0.0, 0.0}, {90.0, 0.0}, {30.0, 8.0}, {180.0, 45.0}}) {
    CameraFrame f = testsupport::roadside_frame();
    f.rotation = camera_rotation(yaw, pitch);
    const Vec3 dir = geometry::pixel_ray_world({f.intrinsic.cx, f.intrinsic.cy}, f);
    const double cy = std::cos(yaw * std::numbers::pi / 180.0);
    const double sy = std::sin(yaw * std::numbers::pi / 180.0);
    const double cp = std::cos(pitch * std::numbers::pi / 180.0);
    const double sp = std::sin(pitch * std::numbers::pi / 180.0);
    const Vec3 fwd{cy * cp, sy * cp, -sp};
    const double scale = dir.norm();
    CHECK(std::abs(dir.x / scale - fwd.x) < 1e-12);
    CHECK(std::abs(dir.y / scale - fwd.y) < 1e-12);
    CHECK(std::abs(dir.z / scale - fwd.z) < 1e-12);
    CHECK(std::abs(f.rotation.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("object extents are physical") {
  CHECK(object_extent("car").x == 4.5);
  CHECK(object_extent("truck").z == 3.2);
  CHECK(object_extent("bus").x == 12.0);
  CHECK(object_extent("human").z == 1.7);
  CHECK(object_extent("pedestrian").z == object_extent("human").z);
  CHECK(object_extent("unknown_thing").x == 1.0);  // neutral stand-in
}

TEST_CASE("the pan-away camera looks off-map for a third of the video") {
  const SceneSpec spec = pan_away_scene(1);
  const Scene s = generate_scene(spec);
  const Quaternion away = camera_rotation(180.0, spec.camera.pitch_deg);
  std::size_t off = 0;
  for (const CameraFrame& f : s.camera.frames)
    if (f.rotation.w == away.w && f.rotation.x == away.x && f.rotation.y == away.y &&
        f.rotation.z == away.z)
      ++off;
  const double frac = static_cast<double>(off) / s.camera.frames.size();
  CHECK(frac >= 0.30);
  CHECK(frac <= 0.40);
}

TEST_CASE("two-car scene has opposing headings") {
  const Scene s = generate_scene(two_car_scene(1));
  REQUIRE(s.ground_truth.size() == 2);

  // A common mid-track frame.
  FrameIndex f = 0;
  for (const ObjectSample& sm : s.ground_truth[0].samples)
    if (s.ground_truth[1].sample_at(sm.frame_index) &&
        s.ground_truth[0].sample_at(sm.frame_index + 1) &&
        s.ground_truth[1].sample_at(sm.frame_index + 1)) {
      f = sm.frame_index + 1;
      break;
    }
  REQUIRE(f > 0);

  const auto ha = query::object_heading(s.ground_truth[0], f, 1);
  const auto hb = query::object_heading(s.ground_truth[1], f, 1);
  REQUIRE(ha.has_value());
  REQUIRE(hb.has_value());
  CHECK(geometry::wrap_degrees(*ha - *hb) == doctest::Approx(180.0).epsilon(1e-9));
}

TEST_CASE("random scenes build valid worlds") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Scene s = generate_scene(random_scene(seed));
    CHECK(s.ground_truth.size() >= 5);
    CHECK(s.ground_truth.size() <= 8);
    CHECK_FALSE(s.network.empty());
    const VideoInput video{s.camera, s.detections};
    const auto report = validate_world(&s.network, {&video, 1});
    CHECK(report.ok());
  }
}

TEST_CASE("scene generation rejects bad specs") {
  SceneSpec spec = straight_lane_scene(1);
  spec.fps = 0.0;
  CHECK_THROWS_AS(generate_scene(spec), InvariantViolation);

  SceneSpec no_wp = straight_lane_scene(1);
  no_wp.objects.push_back({"ghost", "car", {}});
  CHECK_THROWS_AS(generate_scene(no_wp), InvariantViolation);
}

TEST_CASE("frame output accuracy counts agreeing frames") {
  CHECK(frame_output_accuracy({2}, {2, 3}, 4) == doctest::Approx(0.75));
  CHECK(frame_output_accuracy({1, 2}, {1, 2}, 10) == doctest::Approx(1.0));
  CHECK(frame_output_accuracy({}, {}, 5) == doctest::Approx(1.0));
  CHECK(frame_output_accuracy({0}, {1}, 2) == doctest::Approx(0.0));
  CHECK(frame_output_accuracy({}, {0, 1}, 4) == doctest::Approx(0.5));
  CHECK(frame_output_accuracy({0}, {0}, 0) == doctest::Approx(1.0));
}

namespace {

MovableObject track_of(std::string oid, std::vector<FrameIndex> frames, double x0) {
  MovableObject o;
  o.oid = std::move(oid);
  o.object_type = "car";
  for (FrameIndex f : frames) {
    const double x = x0 + 30.0 * static_cast<double>(f);
    o.samples.push_back({f, static_cast<double>(f), BBox{x, 100, x + 20, 140}, {}});
  }
  return o;
}

}  // namespace

TEST_CASE("association accuracy measures identity preservation") {
  const std::vector<MovableObject> truth = {track_of("gt", {0, 1, 2, 3}, 0.0)};

  // Perfect single track.
  CHECK(association_accuracy(truth, std::vector<MovableObject>{track_of("p", {0, 1, 2, 3}, 0.0)}) ==
        doctest::Approx(1.0));

  // Identity split in the middle: of the 6 frame pairs only (0,1) and (2,3)
  // stay within one predicted track.
  const std::vector<MovableObject> split = {track_of("p1", {0, 1}, 0.0),
                                            track_of("p2", {2, 3}, 0.0)};
  CHECK(association_accuracy(truth, split) == doctest::Approx(1.0 / 3.0));

  // Restricting the frame universe can hide the break.
  const std::set<FrameIndex> head = {0, 1};
  CHECK(association_accuracy(truth, split, &head) == doctest::Approx(1.0));

  // Boxes that never reach IoU 0.5 match nothing.
  CHECK(association_accuracy(truth, std::vector<MovableObject>{track_of("far", {0, 1, 2, 3},
                                                                        500.0)}) ==
        doctest::Approx(0.0));

  // No truth pairs at all: vacuous agreement.
  const std::vector<MovableObject> lone = {track_of("gt", {0}, 0.0)};
  CHECK(association_accuracy(lone, split) == doctest::Approx(1.0));
}

TEST_CASE("oracle matches follow the ground truth") {
  const Scene s = generate_scene(straight_lane_scene(1));
  const auto car = predicate::ObjectRef{"v"};
  const auto pred =
      predicate::type_eq(car, "car") && (predicate::distance(car, predicate::CameraRef{}) < 40.0);
  const std::vector<std::string> vars = {"v"};
  const auto matches = oracle_matches(s, pred, vars);

  // Manual reference: detected frames where the car is within 40 m.
  const std::vector<MovableObject> truth = detected_truth(s);
  std::set<FrameIndex> expect;
  for (const MovableObject& o : truth) {
    if (o.object_type != "car") continue;
    for (const ObjectSample& sm : o.samples) {
      const Vec3 cam = s.camera.frames[sm.frame_index].translation;
      if ((sm.location - cam).norm() < 40.0) expect.insert(sm.frame_index);
    }
  }
  REQUIRE_FALSE(expect.empty());
  std::set<FrameIndex> got;
  for (const auto& m : matches) got.insert(m.frame);
  CHECK(got == expect);
}

TEST_CASE("the ablation harness scores every setup against the baseline") {
  const Scene s = generate_scene(intersection_scene(3));
  const auto car = predicate::ObjectRef{"v"};
  const auto pred =
      predicate::type_eq(car, "car") && (predicate::distance(car, predicate::CameraRef{}) < 50.0) &&
      predicate::contains(ConstructType::Intersection, car);
  const std::vector<std::string> vars = {"v"};
  const std::vector<VideoInput> videos = {{s.camera, s.detections}};

  const AblationReport rep = run_ablation(s.network, videos, pred, vars);
  REQUIRE(rep.setups.size() == 7);
  const std::vector<std::string> names = {"SB", "S1", "S2", "S3", "S4", "S5", "S6"};
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(rep.setups[i].name == names[i]);

  CHECK(rep.frames_total == static_cast<std::int64_t>(s.camera.frame_count()));

  const SetupResult& sb = rep.setups[0];
  CHECK(sb.frame_accuracy == doctest::Approx(1.0));
  CHECK(sb.association == doctest::Approx(1.0));
  CHECK(sb.skipping_ratio == doctest::Approx(0.0));
  CHECK_FALSE(sb.matched_frames.empty());
  CHECK(sb.counters.frames_decoded == rep.frames_total);

  for (const SetupResult& r : rep.setups) {
    CHECK(r.skipping_ratio >= 0.0);
    CHECK(r.skipping_ratio <= 1.0);
    CHECK(r.counters.frames_decoded <= sb.counters.frames_decoded);
    CHECK(r.frame_accuracy >= 0.0);
    CHECK(r.frame_accuracy <= 1.0);
    CHECK(r.matches >= static_cast<std::int64_t>(r.matched_frames.size()));
  }

  // The all-optimizations setup does strictly less work on this scene.
  const SetupResult& s6 = rep.setups[6];
  CHECK(s6.counters.detections_tracked < sb.counters.detections_tracked);
  CHECK(s6.frame_accuracy >= 0.9);

  const std::string table = format_ablation(rep);
  for (const std::string& n : names) CHECK(table.find(n) != std::string::npos);
  CHECK(table.find("frames_dec") != std::string::npos);
  CHECK(table.find("frame_acc") != std::string::npos);
}
