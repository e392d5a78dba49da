#include "geovan/planner.hpp"

#include <algorithm>
#include <cstdio>

namespace geovan::planner {

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::RoadVisibilityPrune: return "road_visibility_prune";
    case StepKind::Decode: return "decode";
    case StepKind::Detect: return "detect";
    case StepKind::ObjectTypePrune: return "object_type_prune";
    case StepKind::Estimate3D: return "estimate_3d";
    case StepKind::ExitFrameSample: return "exit_frame_sample";
    case StepKind::Track: return "track";
  }
  return "unknown";
}

bool ExecutionPlan::has(StepKind k) const {
  return std::find(steps.begin(), steps.end(), k) != steps.end();
}

ExecutionPlan make_plan(const predicate::Pred& p, const PlannerOptions& opts) {
  return make_plan(p, opts, {});
}

ExecutionPlan make_plan(const predicate::Pred& p, const PlannerOptions& opts,
                        predicate::StepSet minimum) {
  using predicate::StepSet;

  // Without a filter every tracked object is returned, so nothing can be
  // skipped.
  StepSet needed = p.empty() ? StepSet::all() : predicate::required_steps(p);
  needed.decode |= minimum.decode;
  needed.detect |= minimum.detect;
  needed.estimate3d |= minimum.estimate3d;
  needed.track |= minimum.track;
  if (needed.track) needed.estimate3d = true;
  if (needed.estimate3d) needed.detect = true;
  if (needed.detect) needed.decode = true;
  const bool user_hook = predicate::has_user_fn(p);
  const bool negation = predicate::has_negation(p);

  ExecutionPlan plan;
  plan.relevant_types = user_hook ? std::nullopt : predicate::relevant_object_types(p);
  plan.contains_types = predicate::contains_targets(p);
  plan.distance_bound = predicate::distance_bound(p);
  plan.frustum_depth = plan.distance_bound.value_or(opts.default_frustum_depth);
  plan.speed_mps = opts.speed_mps;
  plan.max_skip = opts.max_skip;
  plan.vehicle_types = opts.vehicle_types;

  const auto types_within = [&plan](const std::set<std::string>& allowed) {
    if (!plan.relevant_types) return false;
    return std::all_of(plan.relevant_types->begin(), plan.relevant_types->end(),
                       [&allowed](const std::string& t) { return allowed.count(t) > 0; });
  };

  // The visibility keep-rule replaces non-containment atoms with True, which
  // is only an upper bound of the real predicate when no atom sits under a
  // negation.
  const bool rvp = opts.toggles.road_visibility_prune && !user_hook && !negation &&
                   !plan.contains_types.empty();
  const bool otp =
      opts.toggles.object_type_prune && !user_hook && plan.relevant_types && needed.detect;
  const bool geo = opts.toggles.geometry_estimate && types_within(opts.groundable_types);
  const bool efs = opts.toggles.exit_frame_sample && !user_hook && needed.track &&
                   types_within(opts.vehicle_types);

  plan.estimate_mode = geo ? EstimateMode::GeometryBased : EstimateMode::ExternalDepth;

  if (rvp) plan.steps.push_back(StepKind::RoadVisibilityPrune);
  if (needed.decode) plan.steps.push_back(StepKind::Decode);
  if (needed.detect) plan.steps.push_back(StepKind::Detect);
  if (otp) plan.steps.push_back(StepKind::ObjectTypePrune);
  if (needed.estimate3d) plan.steps.push_back(StepKind::Estimate3D);
  if (efs) plan.steps.push_back(StepKind::ExitFrameSample);
  if (needed.track) plan.steps.push_back(StepKind::Track);
  return plan;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_types(const std::set<std::string>& types) {
  std::string out = "[";
  for (const std::string& t : types) {
    if (out.size() > 1) out += " ";
    out += t;
  }
  return out + "]";
}

}  // namespace

std::string format_plan(const ExecutionPlan& plan) {
  std::string out;
  int i = 0;
  for (const StepKind k : plan.steps) {
    out += std::to_string(++i) + ". " + std::string(to_string(k));
    switch (k) {
      case StepKind::RoadVisibilityPrune: {
        std::set<std::string> names;
        for (const ConstructType t : plan.contains_types) names.insert(std::string(to_string(t)));
        out += "  construct_types=" + format_types(names) +
               " frustum_depth=" + format_number(plan.frustum_depth);
        break;
      }
      case StepKind::ObjectTypePrune:
        if (plan.relevant_types) out += "  types=" + format_types(*plan.relevant_types);
        break;
      case StepKind::Estimate3D:
        out += plan.estimate_mode == EstimateMode::GeometryBased ? "  mode=geometry"
                                                                 : "  mode=external_depth";
        break;
      case StepKind::ExitFrameSample:
        out += "  speed_mps=" + format_number(plan.speed_mps) +
               " max_skip=" + (plan.max_skip ? std::to_string(*plan.max_skip) : "none");
        break;
      default:
        break;
    }
    out += "\n";
  }
  return out;
}

}  // namespace geovan::planner
