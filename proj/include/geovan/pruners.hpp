#pragma once

#include <set>
#include <span>
#include <vector>

#include "geovan/predicate.hpp"
#include "geovan/road_network.hpp"
#include "geovan/types.hpp"

namespace geovan::pruners {

// Construct types whose polygon overlaps the camera's viewable area at the
// given frustum depth. A degenerate view (camera pointing straight down, all
// ground projections collinear) sees nothing.
std::set<ConstructType> visible_construct_types(const CameraFrame& frame,
                                                const RoadNetwork& network,
                                                double frustum_depth);

// Frame-keep decision for visibility pruning. Containment atoms are replaced
// by construct-type visibility, every other atom by true (their value is
// unknowable before detection runs). Keep the frame iff the substituted
// predicate holds. Only sound for negation-free predicates; the planner
// enforces that.
bool rvp_keep_frame(const predicate::Pred& p, const std::set<ConstructType>& visible);

// Detections whose class label is in `relevant`, order preserved.
std::vector<Detection> otp_filter(std::span<const Detection> detections,
                                  const std::set<std::string>& relevant);

}  // namespace geovan::pruners
