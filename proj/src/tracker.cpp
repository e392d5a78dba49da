#include "geovan/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geovan/errors.hpp"

namespace geovan::tracker {

namespace {

// Forbidden pairs enter the potentials as a large finite cost so the solver
// stays numerically well behaved; they are dropped from the result afterward.
constexpr double kForbidden = 1e15;

// Shortest augmenting path assignment over an n x m matrix, n <= m.
// Potentials-based O(n^2 m); row i of the result holds its column.
std::vector<int> solve_rect(const std::vector<std::vector<double>>& a, int n, int m) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  std::vector<int> result(n, -1);
  if (m == 0) return result;
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != m)
      throw InvariantViolation("cost matrix rows must have equal length");

  const bool transpose = n > m;
  const int rows = transpose ? m : n;
  const int cols = transpose ? n : m;
  std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double c = transpose ? cost[j][i] : cost[i][j];
      a[i][j] = std::isfinite(c) ? std::min(c, kForbidden) : kForbidden;
    }

  const std::vector<int> row_to_col = solve_rect(a, rows, cols);
  for (int i = 0; i < rows; ++i) {
    const int j = row_to_col[i];
    if (j < 0 || a[i][j] >= kForbidden / 2) continue;
    if (transpose)
      result[j] = i;
    else
      result[i] = j;
  }
  return result;
}

namespace {

struct Track {
  int id = 0;
  std::string type;
  BBox last_bbox;
  FrameIndex last_frame = 0;
  Vec2 velocity{0.0, 0.0};  // pixels per frame-index unit
  int missed = 0;
  std::vector<ObjectSample> samples;
};

}  // namespace

std::vector<MovableObject> track_video(std::span<const FrameIndex> frames,
                                       std::span<const double> timestamps,
                                       std::span<const std::vector<LocatedDetection>> detections,
                                       const std::string& oid_prefix,
                                       const TrackerConfig& cfg, TrackerStats* stats) {
  if (frames.size() != detections.size() || frames.size() != timestamps.size())
    throw InvariantViolation("frames, timestamps and detections must run parallel");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Track> alive;
  std::vector<Track> done;
  int next_id = 0;

  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FrameIndex frame = frames[k];
    const double ts = timestamps[k];
    const std::vector<LocatedDetection>& dets = detections[k];
    if (stats) {
      ++stats->frames;
      stats->detections += static_cast<std::int64_t>(dets.size());
    }

    std::vector<BBox> predicted(alive.size());
    for (std::size_t t = 0; t < alive.size(); ++t) {
      const double gap = static_cast<double>(frame - alive[t].last_frame);
      const Vec2 shift = alive[t].velocity * gap;
      const BBox& b = alive[t].last_bbox;
      predicted[t] = {b.x1 + shift.x, b.y1 + shift.y, b.x2 + shift.x, b.y2 + shift.y};
    }

    std::vector<std::vector<double>> cost(alive.size(), std::vector<double>(dets.size()));
    for (std::size_t t = 0; t < alive.size(); ++t) {
      for (std::size_t d = 0; d < dets.size(); ++d) {
        if (stats) ++stats->cost_evaluations;
        if (alive[t].type != dets[d].detection.class_label) {
          cost[t][d] = kInf;
          continue;
        }
        const double overlap = iou(predicted[t], dets[d].detection.bbox);
        cost[t][d] = overlap < cfg.iou_min ? kInf : 1.0 - overlap;
      }
    }

    const std::vector<int> match = hungarian(cost);
    std::vector<char> det_taken(dets.size(), 0);

    std::vector<Track> still_alive;
    still_alive.reserve(alive.size() + dets.size());
    for (std::size_t t = 0; t < alive.size(); ++t) {
      Track& tr = alive[t];
      const int d = match[t];
      if (d >= 0) {
        det_taken[d] = 1;
        const LocatedDetection& det = dets[d];
        const double gap = static_cast<double>(frame - tr.last_frame);
        const Vec2 displacement = det.detection.bbox.center() - tr.last_bbox.center();
        const Vec2 observed = displacement * (1.0 / gap);
        tr.velocity = observed * cfg.velocity_alpha + tr.velocity * (1.0 - cfg.velocity_alpha);
        tr.last_bbox = det.detection.bbox;
        tr.last_frame = frame;
        tr.missed = 0;
        tr.samples.push_back({frame, ts, det.detection.bbox, det.location});
        still_alive.push_back(std::move(tr));
      } else {
        ++tr.missed;
        if (tr.missed > cfg.max_age) {
          if (stats) ++stats->retired;
          done.push_back(std::move(tr));
        } else {
          still_alive.push_back(std::move(tr));
        }
      }
    }

    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (det_taken[d]) continue;
      Track tr;
      tr.id = next_id++;
      tr.type = dets[d].detection.class_label;
      tr.last_bbox = dets[d].detection.bbox;
      tr.last_frame = frame;
      tr.samples.push_back({frame, ts, dets[d].detection.bbox, dets[d].location});
      if (stats) ++stats->births;
      still_alive.push_back(std::move(tr));
    }

    alive = std::move(still_alive);
  }

  for (Track& tr : alive) done.push_back(std::move(tr));
  std::sort(done.begin(), done.end(), [](const Track& a, const Track& b) { return a.id < b.id; });

  std::vector<MovableObject> out;
  out.reserve(done.size());
  for (Track& tr : done) {
    MovableObject o;
    o.oid = oid_prefix + std::to_string(tr.id);
    o.object_type = std::move(tr.type);
    o.samples = std::move(tr.samples);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace geovan::tracker
