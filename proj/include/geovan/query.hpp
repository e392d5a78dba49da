#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geovan/predicate.hpp"
#include "geovan/road_network.hpp"
#include "geovan/types.hpp"

namespace geovan::query {

// Heading of o's motion at `frame` in degrees counterclockwise from east,
// measured as the displacement from the sample `window` positions earlier
// (or later, at the track start). nullopt when o has no sample at the frame
// or the displacement is under 1e-6 m (stationary).
std::optional<double> object_heading(const MovableObject& o, FrameIndex frame, int window = 1);

struct QueryMatch {
  FrameIndex frame = 0;
  // Bound oids: variable order for asymmetric predicates, sorted for
  // symmetric ones (where the unordered tuple is the result).
  std::vector<std::string> oids;

  friend bool operator==(const QueryMatch&, const QueryMatch&) = default;
};

struct QueryStats {
  std::int64_t frames_evaluated = 0;
  std::int64_t candidate_objects = 0;  // per-frame candidates after type prefilter
  std::int64_t tuples_evaluated = 0;
};

struct QueryConfig {
  int heading_window = 1;
};

// Every (frame, tuple of distinct tracked objects) satisfying p, ordered by
// frame then oids. Candidates are prefiltered by the predicate's relevant
// object types; symmetric predicates enumerate unordered tuples once.
// Variables bind in `vars` order.
std::vector<QueryMatch> execute_query(std::span<const MovableObject> objects,
                                      const CameraConfig& camera,
                                      const RoadNetwork* network,
                                      const predicate::Pred& p,
                                      std::span<const std::string> vars,
                                      const std::map<std::string, predicate::UserFnImpl>* user_fns = nullptr,
                                      QueryStats* stats = nullptr,
                                      const QueryConfig& cfg = {});

}  // namespace geovan::query
