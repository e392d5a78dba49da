#include "geovan/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geovan/errors.hpp"

namespace geovan::io {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << text;
  if (!out) throw ParseError(path + ": write failed");
}

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError(where + ": missing number field '" + key + "'");
  return j[key].get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(where + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

const json& require_array(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError(where + ": missing array field '" + key + "'");
  return j[key];
}

Vec3 vec3_from(const json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 3) throw ParseError(where + ": expected [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

BBox bbox_from(const json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 4) throw ParseError(where + ": expected [x1, y1, x2, y2]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
}

json to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

CameraConfig load_camera_config(const std::string& path) {
  const json j = parse_file(path);
  CameraConfig cam;
  cam.camera_id = require_string(j, "camera_id", path);
  for (const json& f : require_array(j, "frames", path)) {
    CameraFrame frame;
    frame.frame_index = static_cast<FrameIndex>(require_number(f, "frame", path));
    frame.timestamp = require_number(f, "timestamp", path);
    frame.width = static_cast<int>(require_number(f, "width", path));
    frame.height = static_cast<int>(require_number(f, "height", path));
    frame.translation = vec3_from(require_array(f, "translation", path), path);
    const json& r = require_array(f, "rotation", path);
    if (r.size() != 4) throw ParseError(path + ": rotation expects [w, x, y, z]");
    frame.rotation = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                      r[3].get<double>()};
    if (!f.contains("intrinsic") || !f["intrinsic"].is_object())
      throw ParseError(path + ": missing intrinsic");
    const json& k = f["intrinsic"];
    frame.intrinsic.fx = require_number(k, "fx", path);
    frame.intrinsic.fy = require_number(k, "fy", path);
    frame.intrinsic.cx = require_number(k, "cx", path);
    frame.intrinsic.cy = require_number(k, "cy", path);
    frame.intrinsic.skew = k.contains("skew") ? k["skew"].get<double>() : 0.0;
    cam.frames.push_back(frame);
  }
  return cam;
}

void write_camera_config(const CameraConfig& camera, const std::string& path) {
  json frames = json::array();
  for (const CameraFrame& f : camera.frames) {
    frames.push_back({{"frame", f.frame_index},
                      {"timestamp", f.timestamp},
                      {"width", f.width},
                      {"height", f.height},
                      {"translation", to_json(f.translation)},
                      {"rotation", json::array({f.rotation.w, f.rotation.x, f.rotation.y,
                                                f.rotation.z})},
                      {"intrinsic",
                       {{"fx", f.intrinsic.fx},
                        {"fy", f.intrinsic.fy},
                        {"skew", f.intrinsic.skew},
                        {"cx", f.intrinsic.cx},
                        {"cy", f.intrinsic.cy}}}});
  }
  write_text(path, json{{"camera_id", camera.camera_id}, {"frames", frames}}.dump(2) + "\n");
}

RoadNetwork load_road_network(const std::string& path) {
  const json j = parse_file(path);
  std::vector<GeographicConstruct> constructs;
  for (const json& c : require_array(j, "constructs", path)) {
    GeographicConstruct g;
    g.construct_id = require_string(c, "id", path);
    const std::string type = require_string(c, "type", path);
    const auto parsed = construct_type_from_string(type);
    if (!parsed) throw ParseError(path + ": unknown construct type '" + type + "'");
    g.type = *parsed;
    for (const json& v : require_array(c, "polygon", path)) {
      if (!v.is_array() || v.size() != 2) throw ParseError(path + ": polygon expects [x, y] pairs");
      g.polygon.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (c.contains("headings"))
      for (const json& h : c["headings"]) g.headings.push_back(h.get<double>());
    constructs.push_back(std::move(g));
  }
  try {
    return RoadNetwork(std::move(constructs));
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_road_network(const RoadNetwork& network, const std::string& path) {
  json constructs = json::array();
  for (const GeographicConstruct& c : network.constructs()) {
    json polygon = json::array();
    for (const Vec2& v : c.polygon) polygon.push_back(json::array({v.x, v.y}));
    constructs.push_back({{"id", c.construct_id},
                          {"type", std::string(to_string(c.type))},
                          {"polygon", polygon},
                          {"headings", c.headings}});
  }
  write_text(path, json{{"constructs", constructs}}.dump(2) + "\n");
}

std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    Detection d;
    d.frame_index = static_cast<FrameIndex>(require_number(j, "frame", where));
    d.bbox = bbox_from(require_array(j, "bbox", where), where);
    d.class_label = require_string(j, "label", where);
    d.confidence = j.contains("confidence") ? j["confidence"].get<double>() : 1.0;
    if (j.contains("depth") && !j["depth"].is_null()) d.depth_hint = j["depth"].get<double>();
    out.push_back(std::move(d));
  }
  return out;
}

void write_detections(std::span<const Detection> detections, const std::string& path) {
  std::string text;
  for (const Detection& d : detections) {
    json j{{"frame", d.frame_index},
           {"bbox", to_json(d.bbox)},
           {"label", d.class_label},
           {"confidence", d.confidence}};
    if (d.depth_hint) j["depth"] = *d.depth_hint;
    text += j.dump() + "\n";
  }
  write_text(path, text);
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

predicate::Ref ref_from(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": a ref must be a string");
  const std::string s = j.get<std::string>();
  if (s == "@camera") return predicate::CameraRef{};
  if (s.empty() || s[0] == '@') throw ParseError(where + ": bad ref '" + s + "'");
  return predicate::ObjectRef{s};
}

std::string ref_to_string(const predicate::Ref& r) {
  if (std::holds_alternative<predicate::CameraRef>(r)) return "@camera";
  return std::get<predicate::ObjectRef>(r).name;
}

// Object positions ('obj' fields) cannot name the camera; '@' stays reserved.
predicate::ObjectRef obj_from(const json& v, const char* field, const std::string& where) {
  const std::string s = require_string(v, field, where);
  if (s.empty() || s[0] == '@') throw ParseError(where + ": bad object name '" + s + "'");
  return predicate::ObjectRef{s};
}

predicate::Pred pred_from(const json& j, const std::string& where) {
  using namespace predicate;
  if (!j.is_object() || j.size() != 1)
    throw ParseError(where + ": a predicate node is a single-key object");
  const std::string key = j.begin().key();
  const json& v = j.begin().value();

  if (key == "and" || key == "or") {
    if (!v.is_array() || v.empty()) throw ParseError(where + ": '" + key + "' expects children");
    Pred acc = pred_from(v[0], where);
    for (std::size_t i = 1; i < v.size(); ++i) {
      const Pred c = pred_from(v[i], where);
      acc = key == "and" ? acc && c : acc || c;
    }
    return acc;
  }
  if (key == "not") return !pred_from(v, where);
  if (key == "type_eq")
    return type_eq(obj_from(v, "obj", where), require_string(v, "label", where));
  if (key == "distance") {
    const std::string cmp = require_string(v, "cmp", where);
    const DistanceExpr e =
        distance(ref_from(v.contains("a") ? v["a"] : json{}, where),
                 ref_from(v.contains("b") ? v["b"] : json{}, where));
    const double meters = require_number(v, "meters", where);
    if (cmp == "lt") return e < meters;
    if (cmp == "le") return e <= meters;
    if (cmp == "gt") return e > meters;
    if (cmp == "ge") return e >= meters;
    throw ParseError(where + ": bad cmp '" + cmp + "'");
  }
  if (key == "contains") {
    const std::string type = require_string(v, "geog", where);
    const auto parsed = construct_type_from_string(type);
    if (!parsed) throw ParseError(where + ": unknown construct type '" + type + "'");
    return contains(*parsed, obj_from(v, "obj", where));
  }
  if (key == "heading_diff")
    return heading_diff(ref_from(v.contains("a") ? v["a"] : json{}, where),
                        ref_from(v.contains("b") ? v["b"] : json{}, where),
                        require_number(v, "lo", where), require_number(v, "hi", where));
  if (key == "udf") return user_fn(require_string(v, "name", where));
  throw ParseError(where + ": unknown predicate node '" + key + "'");
}

json pred_to(const predicate::Node& node) {
  using namespace predicate;
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          json children = json::array();
          for (const NodePtr& c : n.children) children.push_back(pred_to(*c));
          return {{std::is_same_v<T, And> ? "and" : "or", children}};
        } else if constexpr (std::is_same_v<T, Not>) {
          return {{"not", pred_to(*n.child)}};
        } else if constexpr (std::is_same_v<T, TypeEq>) {
          return {{"type_eq", {{"obj", n.obj.name}, {"label", n.label}}}};
        } else if constexpr (std::is_same_v<T, DistanceCmp>) {
          const char* cmp = n.cmp == Cmp::Lt   ? "lt"
                            : n.cmp == Cmp::Le ? "le"
                            : n.cmp == Cmp::Gt ? "gt"
                                               : "ge";
          return {{"distance",
                   {{"a", ref_to_string(n.a)},
                    {"b", ref_to_string(n.b)},
                    {"cmp", cmp},
                    {"meters", n.meters}}}};
        } else if constexpr (std::is_same_v<T, Contains>) {
          return {{"contains",
                   {{"geog", std::string(to_string(n.geog))}, {"obj", n.obj.name}}}};
        } else if constexpr (std::is_same_v<T, HeadingDiff>) {
          return {{"heading_diff",
                   {{"a", ref_to_string(n.a)},
                    {"b", ref_to_string(n.b)},
                    {"lo", n.lo},
                    {"hi", n.hi}}}};
        } else {
          static_assert(std::is_same_v<T, UserFn>);
          return {{"udf", {{"name", n.name}}}};
        }
      },
      node.v());
}

}  // namespace

predicate::Pred parse_predicate(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("predicate: ") + e.what());
  }
  if (j.is_null()) return {};
  return pred_from(j, "predicate");
}

std::string predicate_to_json(const predicate::Pred& p) {
  if (p.empty()) return "null";
  return pred_to(*p.node()).dump(2);
}

// ---------------------------------------------------------------------------
// Tracks, manifest, stats

std::vector<MovableObject> load_tracks(const std::string& path) {
  const json j = parse_file(path);
  std::vector<MovableObject> out;
  for (const json& o : require_array(j, "objects", path)) {
    MovableObject m;
    m.oid = require_string(o, "oid", path);
    m.object_type = require_string(o, "type", path);
    for (const json& s : require_array(o, "samples", path)) {
      ObjectSample sample;
      sample.frame_index = static_cast<FrameIndex>(require_number(s, "frame", path));
      sample.timestamp = require_number(s, "timestamp", path);
      sample.bbox = bbox_from(require_array(s, "bbox", path), path);
      sample.location = vec3_from(require_array(s, "location", path), path);
      m.samples.push_back(sample);
    }
    out.push_back(std::move(m));
  }
  return out;
}

void write_tracks(std::span<const MovableObject> objects, const std::string& path) {
  json arr = json::array();
  for (const MovableObject& o : objects) {
    json samples = json::array();
    for (const ObjectSample& s : o.samples)
      samples.push_back({{"frame", s.frame_index},
                         {"timestamp", s.timestamp},
                         {"bbox", to_json(s.bbox)},
                         {"location", to_json(s.location)}});
    arr.push_back({{"oid", o.oid}, {"type", o.object_type}, {"samples", samples}});
  }
  write_text(path, json{{"objects", arr}}.dump(2) + "\n");
}

void write_manifest_json(const workflow::ObserveResult& result, const std::string& path) {
  json videos = json::array();
  for (const workflow::VideoManifest& man : result.manifest) {
    json frames = json::array();
    for (const workflow::ManifestFrame& f : man.frames) {
      json tuples = json::array();
      for (const auto& tuple : f.tuples) tuples.push_back(tuple);
      frames.push_back(
          {{"frame", f.frame}, {"tuples", tuples}, {"context_only", f.context_only}});
    }
    videos.push_back({{"camera_id", man.camera_id}, {"frames", frames}});
  }
  write_text(path, json{{"videos", videos}}.dump(2) + "\n");
}

namespace {

json counters_to(const workflow::WorkCounters& c) {
  return {{"rvp_frames_evaluated", c.rvp_frames_evaluated},
          {"rvp_frames_dropped", c.rvp_frames_dropped},
          {"frames_decoded", c.frames_decoded},
          {"frames_detected", c.frames_detected},
          {"detections_ingested", c.detections_ingested},
          {"detections_after_type_prune", c.detections_after_type_prune},
          {"locations_estimated", c.locations_estimated},
          {"detections_dropped_no_depth", c.detections_dropped_no_depth},
          {"frames_sampled", c.frames_sampled},
          {"frames_tracked", c.frames_tracked},
          {"detections_tracked", c.detections_tracked},
          {"predicate_evaluations", c.predicate_evaluations}};
}

}  // namespace

void write_stats_json(const workflow::RunStats& stats, const std::string& path) {
  json videos = json::array();
  for (const workflow::VideoStats& v : stats.videos) {
    json steps = json::array();
    for (const workflow::StepTiming& s : v.steps)
      steps.push_back({{"name", s.name}, {"ms", s.ms}});
    videos.push_back({{"camera_id", v.camera_id},
                      {"frames_total", v.frames_total},
                      {"frames_after_visibility", v.frames_after_visibility},
                      {"frames_sampled", v.frames_sampled},
                      {"skipping_ratio", v.skipping_ratio},
                      {"detections_total", v.detections_total},
                      {"detections_after_type", v.detections_after_type},
                      {"detections_located", v.detections_located},
                      {"detections_dropped_no_depth", v.detections_dropped_no_depth},
                      {"detections_tracked", v.detections_tracked},
                      {"tracks", v.tracks},
                      {"matches", v.matches},
                      {"steps", steps}});
  }
  write_text(path,
             json{{"videos", videos}, {"counters", counters_to(stats.counters)}}.dump(2) + "\n");
}

std::string format_stats(const workflow::RunStats& stats) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %7s %8s %8s %6s %6s %8s %7s %8s\n", "video", "frames",
                "visible", "sampled", "dets", "typed", "located", "tracks", "matches");
  out += line;
  for (const workflow::VideoStats& v : stats.videos) {
    std::snprintf(line, sizeof(line), "%-10s %7lld %8lld %8lld %6lld %6lld %8lld %7lld %8lld\n",
                  v.camera_id.c_str(), static_cast<long long>(v.frames_total),
                  static_cast<long long>(v.frames_after_visibility),
                  static_cast<long long>(v.frames_sampled),
                  static_cast<long long>(v.detections_total),
                  static_cast<long long>(v.detections_after_type),
                  static_cast<long long>(v.detections_located),
                  static_cast<long long>(v.tracks), static_cast<long long>(v.matches));
    out += line;
    for (const workflow::StepTiming& s : v.steps) {
      std::snprintf(line, sizeof(line), "    %-24s %10.3f ms\n", s.name.c_str(), s.ms);
      out += line;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workflow files

WorkflowFile load_workflow(const std::string& path) {
  const json j = parse_file(path);
  WorkflowFile w;
  if (j.contains("road_network")) w.road_network_path = j["road_network"].get<std::string>();
  if (j.contains("videos"))
    for (const json& v : j["videos"]) {
      WorkflowFile::Video video;
      video.camera_path = require_string(v, "camera", path);
      video.detections_path = require_string(v, "detections", path);
      if (v.contains("images")) video.images_dir = v["images"].get<std::string>();
      w.videos.push_back(std::move(video));
    }
  if (j.contains("objects"))
    for (const json& o : j["objects"]) w.objects.push_back(o.get<std::string>());
  if (j.contains("filter") && !j["filter"].is_null()) w.filter = pred_from(j["filter"], path);
  if (j.contains("observe")) {
    const json& o = j["observe"];
    if (o.contains("mode")) w.observe_mode = o["mode"].get<std::string>();
    if (o.contains("out")) w.out_dir = o["out"].get<std::string>();
    if (o.contains("annotate")) w.annotate = o["annotate"].get<bool>();
    if (o.contains("padding")) w.padding = o["padding"].get<int>();
  }
  if (w.observe_mode != "objects" && w.observe_mode != "save_frames")
    throw ParseError(path + ": observe mode must be 'objects' or 'save_frames'");
  if (j.contains("options")) {
    const json& o = j["options"];
    if (o.contains("speed_mps")) w.speed_mps = o["speed_mps"].get<double>();
    if (o.contains("max_skip")) w.max_skip = o["max_skip"].get<int>();
    if (o.contains("frustum_depth")) w.frustum_depth = o["frustum_depth"].get<double>();
    if (o.contains("heading_window")) w.heading_window = o["heading_window"].get<int>();
    if (o.contains("disable"))
      for (const json& d : o["disable"]) w.disabled.insert(d.get<std::string>());
  }
  for (const std::string& d : w.disabled)
    if (d != "rvp" && d != "otp" && d != "geo3d" && d != "efs")
      throw ParseError(path + ": unknown optimization '" + d + "'");
  return w;
}

void write_scene(const harness::Scene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_camera_config(scene.camera, (fs::path(dir) / "camera.json").string());
  write_road_network(scene.network, (fs::path(dir) / "road_network.json").string());
  write_detections(scene.detections, (fs::path(dir) / "detections.ndjson").string());
  write_tracks(scene.ground_truth, (fs::path(dir) / "ground_truth.json").string());
}

// ---------------------------------------------------------------------------
// PPM images

ImageRGB read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::string magic;
  in >> magic;
  if (magic != "P6") throw ParseError(path + ": not a binary PPM (P6) file");
  const auto next_int = [&](const char* what) {
    // Skip whitespace and '#' comment lines between header fields.
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long long v = -1;
    in >> v;
    if (!in || v < 0) throw ParseError(path + ": bad " + what);
    return v;
  };
  ImageRGB img;
  img.width = static_cast<int>(next_int("width"));
  img.height = static_cast<int>(next_int("height"));
  const long long maxval = next_int("maxval");
  if (maxval != 255) throw ParseError(path + ": only maxval 255 is supported");
  in.get();  // single whitespace byte after the header
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw ParseError(path + ": truncated pixel data");
  return img;
}

void write_ppm(const ImageRGB& img, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw ParseError(path + ": write failed");
}

void draw_box(ImageRGB& img, const BBox& box, unsigned char r, unsigned char g,
              unsigned char b) {
  const auto set = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    const std::size_t at = (static_cast<std::size_t>(y) * img.width + x) * 3;
    img.pixels[at] = r;
    img.pixels[at + 1] = g;
    img.pixels[at + 2] = b;
  };
  const int x1 = static_cast<int>(std::lround(box.x1));
  const int y1 = static_cast<int>(std::lround(box.y1));
  const int x2 = static_cast<int>(std::lround(box.x2));
  const int y2 = static_cast<int>(std::lround(box.y2));
  for (int t = 0; t < 2; ++t) {
    for (int x = x1; x <= x2; ++x) {
      set(x, y1 + t);
      set(x, y2 - t);
    }
    for (int y = y1; y <= y2; ++y) {
      set(x1 + t, y);
      set(x2 - t, y);
    }
  }
}

}  // namespace geovan::io
