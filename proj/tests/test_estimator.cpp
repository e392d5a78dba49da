#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geovan/estimator.hpp"
#include "geovan/geometry.hpp"
#include "geovan/harness.hpp"
#include "geovan/rng.hpp"
#include "test_support.hpp"

using namespace geovan;
using namespace geovan::estimator;
using testsupport::near_vec3;

namespace {

// Box whose bottom-center projects exactly from `ground`, for frames that see
// the point. Returns false when the projection fails.
bool box_for_ground(const Vec3& ground, const CameraFrame& f, BBox& out) {
  auto pd = geometry::world_to_pixel(ground, f);
  if (!pd) return false;
  out = BBox{pd->pixel.u - 12.0, pd->pixel.v - 30.0, pd->pixel.u + 12.0, pd->pixel.v};
  return true;
}

}  // namespace

TEST_CASE("recovers ground points exactly") {
  CameraFrame f = testsupport::roadside_frame();
  SplitMix64 rng(42);
  int tested = 0;
  while (tested < 200) {
    Vec3 ground{rng.uniform(-60.0, 80.0), rng.uniform(-40.0, 40.0), 0.0};
    BBox box;
    if (!box_for_ground(ground, f, box)) continue;
    auto r = ground_point_3d(box, f);
    REQUIRE(r.status == GroundPointStatus::Ok);
    CHECK(near_vec3(r.point, ground, 1e-6));
    CHECK(r.point.z == 0.0);  // snapped exactly onto the plane
    CHECK(r.depth > 0.0);
    ++tested;
  }
}

TEST_CASE("depth equals the camera-frame distance to the plane hit") {
  CameraFrame f = testsupport::roadside_frame();
  Vec3 ground{5.0, 6.0, 0.0};
  BBox box;
  REQUIRE(box_for_ground(ground, f, box));
  auto r = ground_point_3d(box, f);
  REQUIRE(r.status == GroundPointStatus::Ok);
  auto pd = geometry::world_to_pixel(r.point, f);
  REQUIRE(pd.has_value());
  CHECK(r.depth == doctest::Approx(pd->depth).epsilon(1e-9));
}

TEST_CASE("plane behind the camera is reported") {
  // Camera looking up and away from the ground: the ray meets z = 0 only
  // backwards.
  CameraFrame f;
  f.translation = Vec3{0, 0, 5};
  f.rotation = harness::camera_rotation(0.0, -45.0);  // tilted upwards
  f.intrinsic = Intrinsic{800, 800, 0, 800, 450};
  f.width = 1600;
  f.height = 900;
  // A box near the image top looks far above the horizon.
  auto r = ground_point_3d(BBox{780, 20, 820, 60}, f);
  CHECK(r.status == GroundPointStatus::BehindCamera);
}

TEST_CASE("ray parallel to the plane has no intersection") {
  // Level camera: the principal ray is horizontal, so a box whose bottom
  // sits exactly on the horizon line never meets the ground.
  CameraFrame f;
  f.translation = Vec3{0, 0, 2};
  f.rotation = harness::camera_rotation(0.0, 0.0);
  f.intrinsic = Intrinsic{800, 800, 0, 800, 450};
  f.width = 1600;
  f.height = 900;
  auto r = ground_point_3d(BBox{780, 410, 820, 450}, f);  // bottom at cy
  CHECK(r.status == GroundPointStatus::NoIntersection);
}

TEST_CASE("custom planes shift the solution") {
  CameraFrame f = testsupport::roadside_frame();
  // A raised deck one meter above ground.
  Vec3 deck_point{10.0, 4.0, 1.0};
  auto pd = geometry::world_to_pixel(deck_point, f);
  REQUIRE(pd.has_value());
  BBox box{pd->pixel.u - 10, pd->pixel.v - 20, pd->pixel.u + 10, pd->pixel.v};
  auto r = ground_point_3d(box, f, Vec3{0, 0, 1}, 1.0);
  REQUIRE(r.status == GroundPointStatus::Ok);
  CHECK(near_vec3(r.point, deck_point, 1e-6));
  CHECK(r.point.z == 1.0);

  // A vertical wall x = 20.
  Vec3 wall_point{20.0, 2.0, 1.5};
  pd = geometry::world_to_pixel(wall_point, f);
  REQUIRE(pd.has_value());
  BBox wall_box{pd->pixel.u - 10, pd->pixel.v - 20, pd->pixel.u + 10, pd->pixel.v};
  r = ground_point_3d(wall_box, f, Vec3{1, 0, 0}, 20.0);
  REQUIRE(r.status == GroundPointStatus::Ok);
  CHECK(near_vec3(r.point, wall_point, 1e-6));
}

TEST_CASE("synthetic scene depth hints agree with the geometric solution") {
  harness::Scene scene = harness::generate_scene(harness::straight_lane_scene(5));
  int checked = 0;
  for (const Detection& d : scene.detections) {
    const CameraFrame& f = scene.camera.frames[static_cast<size_t>(d.frame_index)];
    auto r = ground_point_3d(d.bbox, f);
    REQUIRE(r.status == GroundPointStatus::Ok);
    REQUIRE(d.depth_hint.has_value());
    CHECK(r.depth == doctest::Approx(*d.depth_hint).epsilon(1e-6));
    Vec3 from_hint = geometry::pixel_to_world(
        geometry::Pixel{d.bbox.bottom_center().x, d.bbox.bottom_center().y}, *d.depth_hint, f);
    CHECK(near_vec3(r.point, from_hint, 1e-6));
    ++checked;
  }
  CHECK(checked > 100);
}
