#include "geovan/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "geovan/errors.hpp"
#include "geovan/geometry.hpp"
#include "geovan/road_network.hpp"

namespace geovan::predicate {

namespace {

NodePtr make(Node::Variant v) { return std::make_shared<const Node>(std::move(v)); }

template <typename F>
void for_each_node(const NodePtr& n, F&& f) {
  if (!n) return;
  f(*n);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          for (const NodePtr& c : v.children) for_each_node(c, f);
        } else if constexpr (std::is_same_v<T, Not>) {
          for_each_node(v.child, f);
        }
      },
      n->v());
}

std::string number_key(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Pred operator&&(const Pred& a, const Pred& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::vector<NodePtr> children;
  const auto absorb = [&children](const Pred& p) {
    if (const auto* conj = std::get_if<And>(&p.node()->v())) {
      children.insert(children.end(), conj->children.begin(), conj->children.end());
    } else {
      children.push_back(p.ptr());
    }
  };
  absorb(a);
  absorb(b);
  return Pred(make(And{std::move(children)}));
}

Pred operator||(const Pred& a, const Pred& b) {
  if (a.empty() || b.empty()) {
    throw InvariantViolation("cannot disjoin with an empty predicate");
  }
  std::vector<NodePtr> children;
  const auto absorb = [&children](const Pred& p) {
    if (const auto* disj = std::get_if<Or>(&p.node()->v())) {
      children.insert(children.end(), disj->children.begin(), disj->children.end());
    } else {
      children.push_back(p.ptr());
    }
  };
  absorb(a);
  absorb(b);
  return Pred(make(Or{std::move(children)}));
}

Pred operator!(const Pred& a) {
  if (a.empty()) throw InvariantViolation("cannot negate an empty predicate");
  return Pred(make(Not{a.ptr()}));
}

Pred type_eq(const ObjectRef& obj, std::string label) {
  return Pred(make(TypeEq{obj, std::move(label)}));
}

Pred contains(ConstructType geog, const ObjectRef& obj) { return Pred(make(Contains{geog, obj})); }

Pred contains(const GeogRef& geog, const ObjectRef& obj) { return contains(geog.type, obj); }

Pred heading_diff(const Ref& a, const Ref& b, double lo, double hi) {
  if (!(lo >= 0.0 && lo <= 360.0 && hi >= 0.0 && hi <= 360.0 && lo <= hi)) {
    throw InvariantViolation("heading_diff interval must satisfy 0 <= lo <= hi <= 360");
  }
  return Pred(make(HeadingDiff{a, b, lo, hi}));
}

Pred user_fn(std::string name) { return Pred(make(UserFn{std::move(name)})); }

DistanceExpr distance(const Ref& a, const Ref& b) { return DistanceExpr{a, b}; }

Pred operator<(const DistanceExpr& d, double meters) {
  return Pred(make(DistanceCmp{d.a, d.b, Cmp::Lt, meters}));
}
Pred operator<=(const DistanceExpr& d, double meters) {
  return Pred(make(DistanceCmp{d.a, d.b, Cmp::Le, meters}));
}
Pred operator>(const DistanceExpr& d, double meters) {
  return Pred(make(DistanceCmp{d.a, d.b, Cmp::Gt, meters}));
}
Pred operator>=(const DistanceExpr& d, double meters) {
  return Pred(make(DistanceCmp{d.a, d.b, Cmp::Ge, meters}));
}

// ---------------------------------------------------------------------------
// Static analyses

StepSet required_steps(const Pred& p) {
  StepSet s;
  for_each_node(p.ptr(), [&s](const Node& n) {
    std::visit(
        [&s](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, TypeEq>) {
            s.detect = true;
          } else if constexpr (std::is_same_v<T, DistanceCmp> || std::is_same_v<T, Contains>) {
            s.estimate3d = true;
          } else if constexpr (std::is_same_v<T, HeadingDiff> || std::is_same_v<T, UserFn>) {
            s.track = true;
          }
        },
        n.v());
  });
  if (s.track) s.estimate3d = true;
  if (s.estimate3d) s.detect = true;
  if (s.detect) s.decode = true;
  return s;
}

namespace {

// Per-variable admissible type sets; a missing key means unconstrained.
using VarTypes = std::map<std::string, std::set<std::string>>;

VarTypes meet_all(const std::vector<VarTypes>& parts) {
  VarTypes out;
  for (const VarTypes& part : parts) {
    for (const auto& [var, types] : part) {
      auto it = out.find(var);
      if (it == out.end()) {
        out.emplace(var, types);
      } else {
        std::set<std::string> inter;
        std::set_intersection(it->second.begin(), it->second.end(), types.begin(), types.end(),
                              std::inserter(inter, inter.begin()));
        it->second = std::move(inter);
      }
    }
  }
  return out;
}

VarTypes join_all(const std::vector<VarTypes>& parts) {
  if (parts.empty()) return {};
  VarTypes out = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) {
    VarTypes next;
    for (const auto& [var, types] : out) {
      auto it = parts[i].find(var);
      if (it == parts[i].end()) continue;  // unconstrained in one branch
      std::set<std::string> uni = types;
      uni.insert(it->second.begin(), it->second.end());
      next.emplace(var, std::move(uni));
    }
    out = std::move(next);
  }
  return out;
}

VarTypes analyze_types(const NodePtr& n, bool positive) {
  return std::visit(
      [&](const auto& v) -> VarTypes {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          std::vector<VarTypes> parts;
          parts.reserve(v.children.size());
          for (const NodePtr& c : v.children) parts.push_back(analyze_types(c, positive));
          const bool conjunctive = std::is_same_v<T, And> == positive;
          return conjunctive ? meet_all(parts) : join_all(parts);
        } else if constexpr (std::is_same_v<T, Not>) {
          return analyze_types(v.child, !positive);
        } else if constexpr (std::is_same_v<T, TypeEq>) {
          if (positive) return {{v.obj.name, {v.label}}};
          return {};
        } else {
          return {};
        }
      },
      n->v());
}

}  // namespace

std::optional<std::set<std::string>> relevant_object_types(const Pred& p) {
  if (p.empty()) return std::nullopt;
  const std::vector<std::string> vars = object_names(p);
  if (vars.empty()) return std::nullopt;
  const VarTypes m = analyze_types(p.ptr(), true);
  std::set<std::string> out;
  for (const std::string& var : vars) {
    const auto it = m.find(var);
    if (it == m.end()) return std::nullopt;  // some object escapes every constraint
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

std::set<ConstructType> contains_targets(const Pred& p) {
  std::set<ConstructType> out;
  for_each_node(p.ptr(), [&out](const Node& n) {
    if (const auto* c = std::get_if<Contains>(&n.v())) out.insert(c->geog);
  });
  return out;
}

namespace {

bool involves_camera_once(const Ref& a, const Ref& b) {
  return std::holds_alternative<CameraRef>(a) != std::holds_alternative<CameraRef>(b);
}

std::optional<double> analyze_bound(const NodePtr& n, bool positive) {
  return std::visit(
      [&](const auto& v) -> std::optional<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          const bool conjunctive = std::is_same_v<T, And> == positive;
          std::optional<double> best;
          for (const NodePtr& c : v.children) {
            const auto b = analyze_bound(c, positive);
            if (conjunctive) {
              // any bounding conjunct bounds the whole conjunction
              if (b && (!best || *b > *best)) best = b;
            } else {
              // every disjunct must be bounded; soundness takes the max
              if (!b) return std::nullopt;
              if (!best || *b > *best) best = b;
            }
          }
          return best;
        } else if constexpr (std::is_same_v<T, Not>) {
          return analyze_bound(v.child, !positive);
        } else if constexpr (std::is_same_v<T, DistanceCmp>) {
          if (!involves_camera_once(v.a, v.b)) return std::nullopt;
          const bool upper = v.cmp == Cmp::Lt || v.cmp == Cmp::Le;
          if (positive == upper) return v.meters;  // negated lower bounds cap distance too
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      n->v());
}

}  // namespace

std::optional<double> distance_bound(const Pred& p) {
  if (p.empty()) return std::nullopt;
  return analyze_bound(p.ptr(), true);
}

bool has_user_fn(const Pred& p) {
  bool found = false;
  for_each_node(p.ptr(), [&found](const Node& n) {
    if (std::holds_alternative<UserFn>(n.v())) found = true;
  });
  return found;
}

bool has_negation(const Pred& p) {
  bool found = false;
  for_each_node(p.ptr(), [&found](const Node& n) {
    if (std::holds_alternative<Not>(n.v())) found = true;
  });
  return found;
}

std::vector<std::string> object_names(const Pred& p) {
  std::set<std::string> names;
  const auto add_ref = [&names](const Ref& r) {
    if (const auto* o = std::get_if<ObjectRef>(&r)) names.insert(o->name);
  };
  for_each_node(p.ptr(), [&](const Node& n) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, TypeEq>) {
            names.insert(v.obj.name);
          } else if constexpr (std::is_same_v<T, Contains>) {
            names.insert(v.obj.name);
          } else if constexpr (std::is_same_v<T, DistanceCmp> || std::is_same_v<T, HeadingDiff>) {
            add_ref(v.a);
            add_ref(v.b);
          }
        },
        n.v());
  });
  return {names.begin(), names.end()};
}

namespace {

using Rename = std::map<std::string, std::string>;

std::string ref_key(const Ref& r, const Rename& rn) {
  if (std::holds_alternative<CameraRef>(r)) return "@cam";
  const std::string& name = std::get<ObjectRef>(r).name;
  const auto it = rn.find(name);
  return "o:" + (it == rn.end() ? name : it->second);
}

// Canonical structural encoding: conjunct/disjunct order and the argument
// order of symmetric atoms never change the key.
std::string structural_key(const NodePtr& n, const Rename& rn) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          std::vector<std::string> keys;
          keys.reserve(v.children.size());
          for (const NodePtr& c : v.children) keys.push_back(structural_key(c, rn));
          std::sort(keys.begin(), keys.end());
          std::string out = std::is_same_v<T, And> ? "and[" : "or[";
          for (const std::string& k : keys) out += k + ";";
          return out + "]";
        } else if constexpr (std::is_same_v<T, Not>) {
          return "not[" + structural_key(v.child, rn) + "]";
        } else if constexpr (std::is_same_v<T, TypeEq>) {
          return "type(" + ref_key(Ref{v.obj}, rn) + "," + v.label + ")";
        } else if constexpr (std::is_same_v<T, DistanceCmp>) {
          std::string a = ref_key(v.a, rn);
          std::string b = ref_key(v.b, rn);
          if (b < a) std::swap(a, b);  // distance is symmetric
          return "dist(" + a + "," + b + "," + std::to_string(static_cast<int>(v.cmp)) + "," +
                 number_key(v.meters) + ")";
        } else if constexpr (std::is_same_v<T, Contains>) {
          return "contains(" + std::string(to_string(v.geog)) + "," + ref_key(Ref{v.obj}, rn) + ")";
        } else if constexpr (std::is_same_v<T, HeadingDiff>) {
          std::string a = ref_key(v.a, rn);
          std::string b = ref_key(v.b, rn);
          // an interval symmetric about 180 is invariant under argument swap
          if (v.lo + v.hi == 360.0 && b < a) std::swap(a, b);
          return "hdiff(" + a + "," + b + "," + number_key(v.lo) + "," + number_key(v.hi) + ")";
        } else {
          return "user(" + v.name + ")";
        }
      },
      n->v());
}

}  // namespace

bool is_symmetric(const Pred& p) {
  const std::vector<std::string> vars = object_names(p);
  if (vars.size() < 2) return true;
  if (has_user_fn(p)) return false;
  Rename identity;
  for (const std::string& v : vars) identity[v] = v;
  const std::string base = structural_key(p.ptr(), identity);
  for (size_t i = 0; i < vars.size(); ++i) {
    for (size_t j = i + 1; j < vars.size(); ++j) {
      Rename swapped = identity;
      swapped[vars[i]] = vars[j];
      swapped[vars[j]] = vars[i];
      if (structural_key(p.ptr(), swapped) != base) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Evaluator {
  const EvalContext& ctx;

  const MovableObject& object(const std::string& name) const {
    if (ctx.objects == nullptr) throw UnknownReference("no object bindings in context");
    const auto it = ctx.objects->find(name);
    if (it == ctx.objects->end() || it->second == nullptr) {
      throw UnknownReference("unbound object '" + name + "'");
    }
    return *it->second;
  }

  const ObjectSample& sample(const MovableObject& o) const {
    const ObjectSample* s = o.sample_at(ctx.frame);
    if (s == nullptr) {
      throw MissingSample("object '" + o.oid + "' has no sample at frame " +
                          std::to_string(ctx.frame));
    }
    return *s;
  }

  Vec3 location(const Ref& r) const {
    if (std::holds_alternative<CameraRef>(r)) {
      if (ctx.camera == nullptr) throw UnknownReference("camera not bound in context");
      return ctx.camera->translation;
    }
    return sample(object(std::get<ObjectRef>(r).name)).location;
  }

  std::optional<double> heading(const Ref& r) const {
    if (std::holds_alternative<CameraRef>(r)) return ctx.camera_heading;
    const MovableObject& o = object(std::get<ObjectRef>(r).name);
    sample(o);  // presence at this frame is a precondition
    if (!ctx.object_heading) return std::nullopt;
    return ctx.object_heading(o, ctx.frame);
  }

  bool eval(const NodePtr& n) const { return std::visit(*this, n->v()); }

  bool operator()(const And& n) const {
    return std::all_of(n.children.begin(), n.children.end(),
                       [this](const NodePtr& c) { return eval(c); });
  }
  bool operator()(const Or& n) const {
    return std::any_of(n.children.begin(), n.children.end(),
                       [this](const NodePtr& c) { return eval(c); });
  }
  bool operator()(const Not& n) const { return !eval(n.child); }

  bool operator()(const TypeEq& n) const {
    const MovableObject& o = object(n.obj.name);
    sample(o);
    return o.object_type == n.label;
  }

  bool operator()(const DistanceCmp& n) const {
    const double d = (location(n.a) - location(n.b)).norm();
    switch (n.cmp) {
      case Cmp::Lt: return d < n.meters;
      case Cmp::Le: return d <= n.meters;
      case Cmp::Gt: return d > n.meters;
      case Cmp::Ge: return d >= n.meters;
    }
    return false;
  }

  bool operator()(const Contains& n) const {
    if (ctx.network == nullptr) return false;
    const Vec2 p = location(Ref{n.obj}).xy();
    for (const std::uint32_t idx : ctx.network->query(Rect{p, p})) {
      const GeographicConstruct& c = ctx.network->constructs()[idx];
      if (c.type != n.geog) continue;
      if (geometry::point_in_polygon(p, c.polygon)) return true;
    }
    return false;
  }

  bool operator()(const HeadingDiff& n) const {
    const std::optional<double> ha = heading(n.a);
    const std::optional<double> hb = heading(n.b);
    if (!ha || !hb) return false;  // stationary object or vertical camera
    const double d = geometry::wrap_degrees(*ha - *hb);
    return d >= n.lo && d <= n.hi;
  }

  bool operator()(const UserFn& n) const {
    if (ctx.user_fns == nullptr) throw UnknownReference("no user functions registered");
    const auto it = ctx.user_fns->find(n.name);
    if (it == ctx.user_fns->end()) throw UnknownReference("unknown user function '" + n.name + "'");
    return it->second(ctx);
  }
};

}  // namespace

bool evaluate(const Pred& p, const EvalContext& ctx) {
  if (p.empty()) return true;
  return Evaluator{ctx}.eval(p.ptr());
}

}  // namespace geovan::predicate
