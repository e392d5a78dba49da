#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "geovan/harness.hpp"
#include "geovan/pruners.hpp"
#include "test_support.hpp"

using namespace geovan;
using namespace geovan::pruners;
using predicate::ObjectRef;

namespace {

const ObjectRef o1{"o1"};

GeographicConstruct patch(std::string id, ConstructType type, double x0, double y0, double x1,
                          double y1) {
  GeographicConstruct c;
  c.construct_id = std::move(id);
  c.type = type;
  c.polygon = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return c;
}

}  // namespace

TEST_CASE("visible construct types depend on view direction") {
  // Camera at the origin looking east; a lane to the east, an intersection to
  // the west.
  CameraFrame f;
  f.translation = Vec3{0, 0, 3};
  f.rotation = harness::camera_rotation(0.0, 10.0);
  f.intrinsic = Intrinsic{800, 800, 0, 800, 450};
  f.width = 1600;
  f.height = 900;

  RoadNetwork net({patch("east", ConstructType::Lane, 10, -3, 40, 3),
                   patch("west", ConstructType::Intersection, -40, -3, -10, 3)});

  auto visible = visible_construct_types(f, net, 60.0);
  CHECK(visible == std::set<ConstructType>{ConstructType::Lane});

  f.rotation = harness::camera_rotation(180.0, 10.0);
  visible = visible_construct_types(f, net, 60.0);
  CHECK(visible == std::set<ConstructType>{ConstructType::Intersection});
}

TEST_CASE("frustum depth limits what counts as visible") {
  CameraFrame f;
  f.translation = Vec3{0, 0, 3};
  f.rotation = harness::camera_rotation(0.0, 10.0);
  f.intrinsic = Intrinsic{800, 800, 0, 800, 450};
  f.width = 1600;
  f.height = 900;

  RoadNetwork net({patch("far", ConstructType::Lane, 200, -3, 240, 3)});
  CHECK(visible_construct_types(f, net, 50.0).empty());
  CHECK(visible_construct_types(f, net, 400.0) ==
        std::set<ConstructType>{ConstructType::Lane});
}

TEST_CASE("nadir camera sees the patch underneath") {
  CameraFrame f;
  f.translation = Vec3{0, 0, 30};
  f.rotation = harness::camera_rotation(0.0, 90.0);
  f.intrinsic = Intrinsic{800, 800, 0, 50, 50};
  f.width = 100;
  f.height = 100;
  // A narrow nadir view still sees the patch under the camera.
  RoadNetwork net({patch("under", ConstructType::Lane, -5, -5, 5, 5)});
  auto visible = visible_construct_types(f, net, 60.0);
  CHECK(visible == std::set<ConstructType>{ConstructType::Lane});
}

TEST_CASE("keep rule substitutes visibility for containment") {
  std::set<ConstructType> only_lane = {ConstructType::Lane};
  std::set<ConstructType> none;

  predicate::Pred in_lane = predicate::contains(ConstructType::Lane, o1);
  predicate::Pred in_ix = predicate::contains(ConstructType::Intersection, o1);

  CHECK(rvp_keep_frame(in_lane, only_lane));
  CHECK_FALSE(rvp_keep_frame(in_ix, only_lane));
  CHECK_FALSE(rvp_keep_frame(in_lane, none));

  // Non-containment atoms cannot rule a frame out.
  predicate::Pred mixed = in_lane && predicate::type_eq(o1, "car");
  CHECK(rvp_keep_frame(mixed, only_lane));
  predicate::Pred typed_only = predicate::type_eq(o1, "car");
  CHECK(rvp_keep_frame(typed_only, none));

  // Disjunction keeps the frame when either containment could hold.
  predicate::Pred either = in_lane || in_ix;
  CHECK(rvp_keep_frame(either, only_lane));
  CHECK_FALSE(rvp_keep_frame(in_ix && typed_only, only_lane));

  // The empty filter keeps everything.
  CHECK(rvp_keep_frame(predicate::Pred{}, none));
}

TEST_CASE("type filter preserves order and drops other labels") {
  std::vector<Detection> dets = {
      {0, BBox{0, 0, 10, 10}, "car", 0.9, std::nullopt},
      {0, BBox{5, 5, 15, 15}, "human", 0.8, std::nullopt},
      {0, BBox{20, 20, 30, 30}, "truck", 0.7, std::nullopt},
      {0, BBox{1, 1, 2, 2}, "car", 0.6, std::nullopt},
  };
  auto kept = otp_filter(dets, {"car", "bus"});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].confidence == doctest::Approx(0.9));
  CHECK(kept[1].confidence == doctest::Approx(0.6));

  CHECK(otp_filter(dets, {}).empty());
  CHECK(otp_filter({}, {"car"}).empty());
}
