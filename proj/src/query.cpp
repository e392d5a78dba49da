#include "geovan/query.hpp"

#include <algorithm>
#include <cmath>

#include "geovan/geometry.hpp"

namespace geovan::query {

std::optional<double> object_heading(const MovableObject& o, FrameIndex frame, int window) {
  if (window < 1) window = 1;
  const auto& s = o.samples;
  const auto it = std::lower_bound(
      s.begin(), s.end(), frame,
      [](const ObjectSample& a, FrameIndex f) { return a.frame_index < f; });
  if (it == s.end() || it->frame_index != frame) return std::nullopt;
  const std::ptrdiff_t idx = it - s.begin();

  Vec3 from, to;
  if (idx - window >= 0) {
    from = s[idx - window].location;
    to = s[idx].location;
  } else if (idx + window < static_cast<std::ptrdiff_t>(s.size())) {
    // Track start: look forward instead.
    from = s[idx].location;
    to = s[idx + window].location;
  } else {
    return std::nullopt;
  }

  const Vec2 d = (to - from).xy();
  if (d.norm() < 1e-6) return std::nullopt;
  return geometry::wrap_degrees(std::atan2(d.y, d.x) * (180.0 / std::acos(-1.0)));
}

namespace {

struct TupleEnumerator {
  std::span<const MovableObject* const> candidates;
  std::span<const std::string> vars;
  bool unordered = false;
  predicate::EvalContext* ctx = nullptr;
  std::map<std::string, const MovableObject*>* bindings = nullptr;
  const predicate::Pred* pred = nullptr;
  QueryStats* stats = nullptr;
  std::vector<QueryMatch>* out = nullptr;
  FrameIndex frame = 0;

  std::vector<std::size_t> chosen;

  void run() {
    chosen.clear();
    descend(0);
  }

  void descend(std::size_t depth) {
    if (depth == vars.size()) {
      if (stats) ++stats->tuples_evaluated;
      if (!predicate::evaluate(*pred, *ctx)) return;
      QueryMatch m;
      m.frame = frame;
      m.oids.reserve(chosen.size());
      for (std::size_t c : chosen) m.oids.push_back(candidates[c]->oid);
      if (unordered) std::sort(m.oids.begin(), m.oids.end());
      out->push_back(std::move(m));
      return;
    }
    const std::size_t start = unordered && depth > 0 ? chosen.back() + 1 : 0;
    for (std::size_t c = start; c < candidates.size(); ++c) {
      if (!unordered && std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      chosen.push_back(c);
      (*bindings)[vars[depth]] = candidates[c];
      descend(depth + 1);
      chosen.pop_back();
    }
    bindings->erase(vars[depth]);
  }
};

}  // namespace

std::vector<QueryMatch> execute_query(std::span<const MovableObject> objects,
                                      const CameraConfig& camera,
                                      const RoadNetwork* network,
                                      const predicate::Pred& p,
                                      std::span<const std::string> vars,
                                      const std::map<std::string, predicate::UserFnImpl>* user_fns,
                                      QueryStats* stats, const QueryConfig& cfg) {
  std::vector<QueryMatch> out;

  // Candidates sorted by oid keep the enumeration order deterministic.
  std::vector<const MovableObject*> pool;
  pool.reserve(objects.size());
  const auto relevant = predicate::relevant_object_types(p);
  for (const MovableObject& o : objects) {
    if (relevant && !relevant->count(o.object_type)) continue;
    pool.push_back(&o);
  }
  std::sort(pool.begin(), pool.end(),
            [](const MovableObject* a, const MovableObject* b) { return a->oid < b->oid; });

  const bool unordered = vars.size() >= 2 && predicate::is_symmetric(p);
  const int window = cfg.heading_window;

  std::map<std::string, const MovableObject*> bindings;
  predicate::EvalContext ctx;
  ctx.network = network;
  ctx.objects = &bindings;
  ctx.user_fns = user_fns;
  ctx.object_heading = [window](const MovableObject& o, FrameIndex f) {
    return object_heading(o, f, window);
  };

  std::vector<const MovableObject*> frame_candidates;
  for (const CameraFrame& cam : camera.frames) {
    const FrameIndex frame = cam.frame_index;
    if (stats) ++stats->frames_evaluated;

    frame_candidates.clear();
    for (const MovableObject* o : pool)
      if (o->sample_at(frame)) frame_candidates.push_back(o);
    if (stats) stats->candidate_objects += static_cast<std::int64_t>(frame_candidates.size());
    if (frame_candidates.size() < vars.size()) continue;

    ctx.camera = &cam;
    ctx.frame = frame;
    ctx.camera_heading = geometry::camera_heading(cam);

    if (vars.empty()) {
      if (stats) ++stats->tuples_evaluated;
      if (predicate::evaluate(p, ctx)) out.push_back({frame, {}});
      continue;
    }

    TupleEnumerator e;
    e.candidates = frame_candidates;
    e.vars = vars;
    e.unordered = unordered;
    e.ctx = &ctx;
    e.bindings = &bindings;
    e.pred = &p;
    e.stats = stats;
    e.out = &out;
    e.frame = frame;
    e.run();
  }

  std::sort(out.begin(), out.end(), [](const QueryMatch& a, const QueryMatch& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.oids < b.oids;
  });
  return out;
}

}  // namespace geovan::query
