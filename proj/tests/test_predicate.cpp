#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "geovan/errors.hpp"
#include "geovan/predicate.hpp"
#include "geovan/road_network.hpp"
#include "test_support.hpp"

using namespace geovan;
using namespace geovan::predicate;

namespace {

const ObjectRef o1{"o1"};
const ObjectRef o2{"o2"};
const ObjectRef o3{"o3"};
const CameraRef cam;

Pred car1() { return type_eq(o1, "car"); }

}  // namespace

TEST_CASE("empty predicate") {
  Pred p;
  CHECK(p.empty());
  CHECK(evaluate(p, EvalContext{}));
  CHECK(required_steps(p) == StepSet{});
  CHECK_FALSE(relevant_object_types(p).has_value());
  CHECK(object_names(p).empty());
  CHECK_FALSE(distance_bound(p).has_value());
  CHECK(contains_targets(p).empty());
}

TEST_CASE("operators build conjunctions and disjunctions") {
  Pred p = car1() && type_eq(o2, "bus");
  CHECK_FALSE(p.empty());
  auto names = object_names(p);
  CHECK(names == std::vector<std::string>{"o1", "o2"});

  // Conjoining with an empty side keeps the other side.
  Pred q = Pred{} && car1();
  CHECK(object_names(q) == std::vector<std::string>{"o1"});

  Pred r = car1() || type_eq(o1, "bus");
  CHECK(object_names(r) == std::vector<std::string>{"o1"});
  CHECK(has_negation(!car1()));
  CHECK_FALSE(has_negation(r));
}

TEST_CASE("required steps escalate with atom kinds") {
  StepSet none;
  CHECK(required_steps(Pred{}) == none);

  StepSet detect{true, true, false, false};
  CHECK(required_steps(car1()) == detect);

  StepSet estimate{true, true, true, false};
  CHECK(required_steps(distance(o1, cam) < 50.0) == estimate);
  CHECK(required_steps(contains(ConstructType::Lane, o1)) == estimate);

  StepSet full = StepSet::all();
  CHECK(required_steps(heading_diff(o1, o2, 90.0, 270.0)) == full);
  CHECK(required_steps(user_fn("f")) == full);

  // The union over atoms, prefix-closed.
  CHECK(required_steps(car1() && (distance(o1, cam) < 10.0)) == estimate);
  CHECK(required_steps(car1() && heading_diff(o1, cam, 0.0, 10.0)) == full);
  CHECK(detect.subset_of(estimate));
  CHECK(estimate.subset_of(full));
  CHECK_FALSE(full.subset_of(estimate));
}

TEST_CASE("relevant object types: conjunction narrows, disjunction widens") {
  auto t = relevant_object_types(car1());
  REQUIRE(t.has_value());
  CHECK(*t == std::set<std::string>{"car"});

  t = relevant_object_types(car1() && type_eq(o1, "bus"));
  REQUIRE(t.has_value());
  CHECK(t->empty());  // unsatisfiable: car and bus at once

  t = relevant_object_types(car1() || type_eq(o1, "bus"));
  REQUIRE(t.has_value());
  CHECK(*t == std::set<std::string>{"bus", "car"});

  t = relevant_object_types(car1() && type_eq(o2, "truck"));
  REQUIRE(t.has_value());
  CHECK(*t == std::set<std::string>{"car", "truck"});

  // o2 escapes every type constraint on one disjunctive branch.
  CHECK_FALSE(relevant_object_types(car1() && (distance(o1, o2) < 5.0)).has_value());
  CHECK_FALSE(relevant_object_types(car1() || type_eq(o2, "bus")).has_value());

  // A negated type constraint does not bound the variable.
  CHECK_FALSE(relevant_object_types(!car1()).has_value());

  // But a negation above an unconstrained branch flips polarity back.
  t = relevant_object_types(!(!car1()));
  REQUIRE(t.has_value());
  CHECK(*t == std::set<std::string>{"car"});
}

TEST_CASE("contains targets collects construct types") {
  Pred p = contains(ConstructType::Lane, o1) &&
           (contains(ConstructType::Intersection, o2) || car1());
  CHECK(contains_targets(p) ==
        std::set<ConstructType>{ConstructType::Lane, ConstructType::Intersection});
}

TEST_CASE("distance bound tracks conjunctive camera bounds") {
  CHECK(distance_bound(distance(o1, cam) < 50.0) == doctest::Approx(50.0));
  CHECK(distance_bound(distance(cam, o1) <= 30.0) == doctest::Approx(30.0));

  // Object-to-object distances say nothing about the camera.
  CHECK_FALSE(distance_bound(distance(o1, o2) < 50.0).has_value());

  // Lower bounds do not cap the distance.
  CHECK_FALSE(distance_bound(distance(o1, cam) > 50.0).has_value());

  // A negated lower bound is an upper bound.
  CHECK(distance_bound(!(distance(o1, cam) > 40.0)) == doctest::Approx(40.0));

  // Conjunction: any bounding conjunct suffices; the loosest wins.
  CHECK(distance_bound((distance(o1, cam) < 50.0) && (distance(o2, cam) < 80.0)) ==
        doctest::Approx(80.0));
  CHECK(distance_bound(car1() && (distance(o1, cam) < 25.0)) == doctest::Approx(25.0));

  // Disjunction: every branch must be bounded.
  CHECK(distance_bound((distance(o1, cam) < 50.0) || (distance(o1, cam) < 20.0)) ==
        doctest::Approx(50.0));
  CHECK_FALSE(distance_bound(car1() || (distance(o1, cam) < 20.0)).has_value());
}

TEST_CASE("user function and negation flags") {
  CHECK(has_user_fn(user_fn("f") && car1()));
  CHECK_FALSE(has_user_fn(car1()));
  CHECK(has_negation(car1() && !type_eq(o2, "bus")));
}

TEST_CASE("symmetry detection") {
  // Single-variable predicates are trivially symmetric.
  CHECK(is_symmetric(car1()));

  // distance is symmetric in its arguments.
  CHECK(is_symmetric(distance(o1, o2) < 10.0));
  CHECK(is_symmetric((distance(o1, o2) < 10.0) && type_eq(o1, "car") && type_eq(o2, "car")));

  // Different type constraints break the swap.
  CHECK_FALSE(is_symmetric((distance(o1, o2) < 10.0) && type_eq(o1, "car") && type_eq(o2, "bus")));

  // Heading interval symmetric about 180 permits the swap.
  CHECK(is_symmetric(heading_diff(o1, o2, 90.0, 270.0)));
  CHECK(is_symmetric(heading_diff(o1, o2, 170.0, 190.0)));
  CHECK_FALSE(is_symmetric(heading_diff(o1, o2, 0.0, 90.0)));

  // Three variables in a chain: o1 and o2 play different roles.
  Pred chain = (distance(o1, o2) < 25.0) && (distance(o2, o3) < 25.0);
  CHECK_FALSE(is_symmetric(chain));

  // A full clique is symmetric.
  Pred clique = (distance(o1, o2) < 25.0) && (distance(o2, o3) < 25.0) &&
                (distance(o1, o3) < 25.0);
  CHECK(is_symmetric(clique));

  CHECK_FALSE(is_symmetric(user_fn("f") && (distance(o1, o2) < 5.0)));
}

namespace {

MovableObject make_object(std::string oid, std::string type,
                          std::vector<ObjectSample> samples) {
  MovableObject o;
  o.oid = std::move(oid);
  o.object_type = std::move(type);
  o.samples = std::move(samples);
  return o;
}

struct Fixture {
  MovableObject a = make_object("a", "car", {{0, 0.0, {}, {0, 0, 0}}, {1, 0.1, {}, {2, 0, 0}}});
  MovableObject b = make_object("b", "bus", {{0, 0.0, {}, {30, 40, 0}}});
  std::map<std::string, const MovableObject*> objects{{"o1", &a}, {"o2", &b}};
  CameraFrame camera = testsupport::roadside_frame();
  EvalContext ctx;

  Fixture() {
    ctx.camera = &camera;
    ctx.frame = 0;
    ctx.objects = &objects;
    ctx.camera_heading = 10.0;
  }
};

}  // namespace

TEST_CASE("evaluate atoms against bound objects") {
  Fixture f;
  CHECK(evaluate(type_eq(o1, "car"), f.ctx));
  CHECK_FALSE(evaluate(type_eq(o1, "bus"), f.ctx));
  CHECK(evaluate(type_eq(o2, "bus"), f.ctx));

  // |a - b| = 50 exactly.
  CHECK(evaluate(distance(o1, o2) <= 50.0, f.ctx));
  CHECK_FALSE(evaluate(distance(o1, o2) < 50.0, f.ctx));
  CHECK(evaluate(distance(o1, o2) >= 50.0, f.ctx));
  CHECK_FALSE(evaluate(distance(o1, o2) > 50.0, f.ctx));

  // Camera sits at (-30, 6, 2.5); object a at the origin.
  const double d_cam = Vec3{-30, 6, 2.5}.norm();
  CHECK(evaluate(distance(o1, cam) < d_cam + 0.01, f.ctx));
  CHECK_FALSE(evaluate(distance(o1, cam) < d_cam - 0.01, f.ctx));

  CHECK(evaluate(car1() && (distance(o1, o2) <= 50.0), f.ctx));
  CHECK(evaluate(type_eq(o1, "bus") || car1(), f.ctx));
  CHECK(evaluate(!type_eq(o1, "bus"), f.ctx));
}

TEST_CASE("evaluate containment against a road network") {
  Fixture f;
  GeographicConstruct lane;
  lane.construct_id = "l";
  lane.type = ConstructType::Lane;
  lane.polygon = {{-5, -5}, {5, -5}, {5, 5}, {-5, 5}};
  RoadNetwork net({lane});
  f.ctx.network = &net;

  CHECK(evaluate(contains(ConstructType::Lane, o1), f.ctx));       // a at origin
  CHECK_FALSE(evaluate(contains(ConstructType::Lane, o2), f.ctx)); // b at (30, 40)
  CHECK_FALSE(evaluate(contains(ConstructType::Intersection, o1), f.ctx));

  f.ctx.network = nullptr;
  CHECK_FALSE(evaluate(contains(ConstructType::Lane, o1), f.ctx));
}

TEST_CASE("evaluate heading atoms") {
  Fixture f;
  f.ctx.object_heading = [](const MovableObject& o, FrameIndex) -> std::optional<double> {
    if (o.oid == "a") return 190.0;
    return std::nullopt;  // b never moves
  };

  // a at 190, camera at 10: difference 180.
  CHECK(evaluate(heading_diff(o1, cam, 170.0, 190.0), f.ctx));
  CHECK(evaluate(heading_diff(cam, o1, 170.0, 190.0), f.ctx));
  CHECK_FALSE(evaluate(heading_diff(o1, cam, 0.0, 90.0), f.ctx));

  // Undefined headings make the atom false, not an error.
  CHECK_FALSE(evaluate(heading_diff(o2, cam, 0.0, 360.0), f.ctx));
  f.ctx.camera_heading = std::nullopt;
  CHECK_FALSE(evaluate(heading_diff(o1, cam, 0.0, 360.0), f.ctx));
}

TEST_CASE("evaluate wraps heading differences") {
  Fixture f;
  f.ctx.object_heading = [](const MovableObject&, FrameIndex) -> std::optional<double> {
    return 350.0;
  };
  f.ctx.camera_heading = 20.0;
  // 350 - 20 = 330.
  CHECK(evaluate(heading_diff(o1, cam, 320.0, 340.0), f.ctx));
  // 20 - 350 wraps to 30.
  CHECK(evaluate(heading_diff(cam, o1, 25.0, 35.0), f.ctx));
}

TEST_CASE("evaluate throws on unbound names and missing samples") {
  Fixture f;
  CHECK_THROWS_AS(evaluate(type_eq(o3, "car"), f.ctx), UnknownReference);

  f.ctx.frame = 1;  // b has no sample at frame 1
  CHECK_THROWS_AS(evaluate(type_eq(o2, "bus"), f.ctx), MissingSample);
  CHECK(evaluate(type_eq(o1, "car"), f.ctx));  // a does

  EvalContext bare;
  CHECK_THROWS_AS(evaluate(type_eq(o1, "car"), bare), UnknownReference);
  CHECK_THROWS_AS(evaluate(user_fn("nope"), f.ctx), UnknownReference);
}

TEST_CASE("evaluate user functions through the registry") {
  Fixture f;
  std::map<std::string, UserFnImpl> fns;
  fns["frame_is_even"] = [](const EvalContext& c) { return c.frame % 2 == 0; };
  f.ctx.user_fns = &fns;

  CHECK(evaluate(user_fn("frame_is_even"), f.ctx));
  f.ctx.frame = 1;
  CHECK_FALSE(evaluate(user_fn("frame_is_even") || type_eq(o1, "bus"), f.ctx));
  CHECK_THROWS_AS(evaluate(user_fn("other"), f.ctx), UnknownReference);
}

TEST_CASE("short-circuit order does not hide errors in touched branches") {
  Fixture f;
  // And with a false first conjunct never touches the second.
  CHECK_FALSE(evaluate(type_eq(o1, "bus") && type_eq(o3, "car"), f.ctx));
  // Or with a true first disjunct never touches the second.
  CHECK(evaluate(car1() || type_eq(o3, "car"), f.ctx));
}
