#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "geovan/types.hpp"

namespace geovan {
class RoadNetwork;
}

namespace geovan::predicate {

// ---------------------------------------------------------------------------
// References

struct ObjectRef {
  std::string name;
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

struct CameraRef {
  friend bool operator==(const CameraRef&, const CameraRef&) = default;
};

using Ref = std::variant<ObjectRef, CameraRef>;

// Handle produced by declaring a construct-type variable in a workflow.
struct GeogRef {
  ConstructType type = ConstructType::Lane;
};

// ---------------------------------------------------------------------------
// AST

class Node;
using NodePtr = std::shared_ptr<const Node>;

struct And {
  std::vector<NodePtr> children;
};
struct Or {
  std::vector<NodePtr> children;
};
struct Not {
  NodePtr child;
};
struct TypeEq {
  ObjectRef obj;
  std::string label;
};

enum class Cmp { Lt, Le, Gt, Ge };

struct DistanceCmp {
  Ref a;
  Ref b;
  Cmp cmp = Cmp::Lt;
  double meters = 0.0;
};

// Exists a construct of the given type whose polygon contains the object's
// ground position (boundary inclusive).
struct Contains {
  ConstructType geog = ConstructType::Lane;
  ObjectRef obj;
};

// ((heading(a) - heading(b)) mod 360) within [lo, hi], inclusive.
struct HeadingDiff {
  Ref a;
  Ref b;
  double lo = 0.0;
  double hi = 360.0;
};

// Opaque user hook, resolved by name at evaluation time. Forces the full
// step set and disables both pruners.
struct UserFn {
  std::string name;
};

class Node {
 public:
  using Variant = std::variant<And, Or, Not, TypeEq, DistanceCmp, Contains, HeadingDiff, UserFn>;
  explicit Node(Variant v) : v_(std::move(v)) {}
  const Variant& v() const { return v_; }

 private:
  Variant v_;
};

// Immutable predicate expression. A default-constructed Pred means "no
// filter" and evaluates true.
class Pred {
 public:
  Pred() = default;
  explicit Pred(NodePtr node) : node_(std::move(node)) {}

  const Node* node() const { return node_.get(); }
  const NodePtr& ptr() const { return node_; }
  bool empty() const { return node_ == nullptr; }

  friend Pred operator&&(const Pred& a, const Pred& b);
  friend Pred operator||(const Pred& a, const Pred& b);
  friend Pred operator!(const Pred& a);

 private:
  NodePtr node_;
};

// ---------------------------------------------------------------------------
// Builders

Pred type_eq(const ObjectRef& obj, std::string label);
Pred contains(ConstructType geog, const ObjectRef& obj);
Pred contains(const GeogRef& geog, const ObjectRef& obj);
Pred heading_diff(const Ref& a, const Ref& b, double lo, double hi);
Pred user_fn(std::string name);

// distance(o, cam) < 50.0 reads like the workflow DSL.
struct DistanceExpr {
  Ref a;
  Ref b;
};
DistanceExpr distance(const Ref& a, const Ref& b);
Pred operator<(const DistanceExpr& d, double meters);
Pred operator<=(const DistanceExpr& d, double meters);
Pred operator>(const DistanceExpr& d, double meters);
Pred operator>=(const DistanceExpr& d, double meters);

// ---------------------------------------------------------------------------
// Static analyses

// Pipeline steps in fixed order; any later step requires all earlier ones.
struct StepSet {
  bool decode = false;
  bool detect = false;
  bool estimate3d = false;
  bool track = false;

  friend bool operator==(const StepSet&, const StepSet&) = default;

  static StepSet all() { return {true, true, true, true}; }
  bool subset_of(const StepSet& o) const {
    return (!decode || o.decode) && (!detect || o.detect) && (!estimate3d || o.estimate3d) &&
           (!track || o.track);
  }
};

// Minimal prefix-closed step set able to evaluate every atom of p.
StepSet required_steps(const Pred& p);

// Sound over-approximation of the object types a satisfying binding may use;
// nullopt when some referenced object escapes every type constraint.
std::optional<std::set<std::string>> relevant_object_types(const Pred& p);

// Construct types appearing in Contains atoms.
std::set<ConstructType> contains_targets(const Pred& p);

// Largest camera-distance bound among conjunctively required Distance atoms;
// nullopt when no such atom bounds the distance.
std::optional<double> distance_bound(const Pred& p);

bool has_user_fn(const Pred& p);
bool has_negation(const Pred& p);

// Distinct object variable names, sorted.
std::vector<std::string> object_names(const Pred& p);

// True when the predicate is structurally invariant under every permutation
// of its object variables (heading intervals symmetric about 180 permit
// argument swaps). Conservative: user hooks make a multi-object predicate
// asymmetric.
bool is_symmetric(const Pred& p);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalContext;
using UserFnImpl = std::function<bool(const EvalContext&)>;

// Everything needed to decide one predicate at one frame of one video.
struct EvalContext {
  const RoadNetwork* network = nullptr;
  const CameraFrame* camera = nullptr;
  FrameIndex frame = 0;
  const std::map<std::string, const MovableObject*>* objects = nullptr;
  // Degrees counterclockwise from east; nullopt = stationary object.
  std::function<std::optional<double>(const MovableObject&, FrameIndex)> object_heading;
  // nullopt = vertical camera.
  std::optional<double> camera_heading;
  const std::map<std::string, UserFnImpl>* user_fns = nullptr;
};

// Decides p for the context's bindings. Empty predicates evaluate true.
// Throws UnknownReference for unbound names and MissingSample when a touched
// object has no sample at the context frame. Heading atoms are false when
// either side's heading is undefined.
bool evaluate(const Pred& p, const EvalContext& ctx);

}  // namespace geovan::predicate
