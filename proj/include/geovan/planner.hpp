#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geovan/predicate.hpp"
#include "geovan/types.hpp"

namespace geovan::planner {

enum class StepKind {
  RoadVisibilityPrune,
  Decode,
  Detect,
  ObjectTypePrune,
  Estimate3D,
  ExitFrameSample,
  Track,
};

std::string_view to_string(StepKind k);

enum class EstimateMode { GeometryBased, ExternalDepth };

struct OptimizationToggles {
  bool road_visibility_prune = true;
  bool object_type_prune = true;
  bool geometry_estimate = true;
  bool exit_frame_sample = true;

  static OptimizationToggles none() { return {false, false, false, false}; }
};

struct PlannerOptions {
  OptimizationToggles toggles;

  // Frustum depth when no distance atom bounds the predicate.
  double default_frustum_depth = 100.0;

  // Sampler assumptions: 25 mph and at most 5 surviving frames per gap.
  double speed_mps = 11.176;
  std::optional<int> max_skip = 5;  // nullopt = unbounded

  // Types whose ground contact point is observable at the bbox bottom.
  std::set<std::string> groundable_types = {"car",        "truck", "bus",       "bicycle",
                                            "motorcycle", "human", "pedestrian"};
  // Types the exit-frame sampler can model (lane-following vehicles).
  std::set<std::string> vehicle_types = {"car", "truck", "bus"};

  // Samples an object heading looks back over (1 = consecutive samples).
  int heading_window = 1;
};

// Ordered pipeline with the per-step configuration the workflow needs.
struct ExecutionPlan {
  std::vector<StepKind> steps;
  EstimateMode estimate_mode = EstimateMode::ExternalDepth;
  double frustum_depth = 100.0;
  std::optional<std::set<std::string>> relevant_types;
  std::set<ConstructType> contains_types;
  std::optional<double> distance_bound;
  double speed_mps = 11.176;
  std::optional<int> max_skip = 5;
  std::set<std::string> vehicle_types;

  bool has(StepKind k) const;
};

// Derives the step list from the predicate's atoms and inserts each
// optimization wherever its soundness conditions hold:
//   - road visibility pruning first, when the predicate has containment
//     targets, no negation and no user hooks;
//   - object type pruning right after detection, when every referenced
//     object is type-bounded and no user hook is present;
//   - geometric ground-plane estimation when every relevant type is
//     groundable, external depth otherwise;
//   - exit frame sampling between estimation and tracking, when tracking is
//     required and every relevant type is a lane-following vehicle.
// An empty predicate needs the full step set (every object is returned).
ExecutionPlan make_plan(const predicate::Pred& p, const PlannerOptions& opts = {});

// Same, but with `minimum` steps forced in (prefix-closed afterwards). The
// workflow uses this to extend a filter's minimal plan to whatever the
// observable itself needs.
ExecutionPlan make_plan(const predicate::Pred& p, const PlannerOptions& opts,
                        predicate::StepSet minimum);

// Stable text rendering, one numbered line per step.
std::string format_plan(const ExecutionPlan& plan);

}  // namespace geovan::planner
