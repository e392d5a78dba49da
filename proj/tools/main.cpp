#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "geovan/errors.hpp"
#include "geovan/harness.hpp"
#include "geovan/io.hpp"
#include "geovan/planner.hpp"
#include "geovan/workflow.hpp"

namespace fs = std::filesystem;
using namespace geovan;

namespace {

struct Overrides {
  bool no_rvp = false;
  bool no_otp = false;
  bool no_geo3d = false;
  bool no_efs = false;
  bool no_all = false;
  std::optional<double> speed_mps;
  std::optional<int> max_skip;  // 0 = unbounded
  std::optional<double> frustum_depth;
  std::optional<int> heading_window;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_flag("--disable-rvp", ov.no_rvp, "Disable road visibility pruning");
  cmd->add_flag("--disable-otp", ov.no_otp, "Disable object type pruning");
  cmd->add_flag("--disable-geo3d", ov.no_geo3d, "Disable geometric ground-plane estimation");
  cmd->add_flag("--disable-efs", ov.no_efs, "Disable exit frame sampling");
  cmd->add_flag("--disable-all-opts", ov.no_all, "Disable every optimization");
  cmd->add_option("--speed-mps", ov.speed_mps, "Assumed vehicle speed for exit prediction");
  cmd->add_option("--max-skip", ov.max_skip, "Largest sampling gap in frames (0 = unbounded)");
  cmd->add_option("--frustum-depth", ov.frustum_depth,
                  "Viewable-area depth when no distance bound applies");
  cmd->add_option("--heading-window", ov.heading_window,
                  "Samples an object heading looks back over");
}

std::string resolve(const std::string& rel, const fs::path& base_dir) {
  if (rel.empty()) return rel;
  const fs::path p(rel);
  return p.is_absolute() ? rel : (base_dir / p).string();
}

void apply_options(planner::PlannerOptions& opt, const io::WorkflowFile& wf,
                   const Overrides& ov) {
  if (wf.speed_mps) opt.speed_mps = *wf.speed_mps;
  if (wf.max_skip)
    opt.max_skip = *wf.max_skip >= 1 ? std::optional<int>(*wf.max_skip) : std::nullopt;
  if (wf.frustum_depth) opt.default_frustum_depth = *wf.frustum_depth;
  if (wf.heading_window) opt.heading_window = *wf.heading_window;
  if (wf.disabled.count("rvp")) opt.toggles.road_visibility_prune = false;
  if (wf.disabled.count("otp")) opt.toggles.object_type_prune = false;
  if (wf.disabled.count("geo3d")) opt.toggles.geometry_estimate = false;
  if (wf.disabled.count("efs")) opt.toggles.exit_frame_sample = false;

  if (ov.speed_mps) opt.speed_mps = *ov.speed_mps;
  if (ov.max_skip)
    opt.max_skip = *ov.max_skip >= 1 ? std::optional<int>(*ov.max_skip) : std::nullopt;
  if (ov.frustum_depth) opt.default_frustum_depth = *ov.frustum_depth;
  if (ov.heading_window) opt.heading_window = *ov.heading_window;
  if (ov.no_all) opt.toggles = planner::OptimizationToggles::none();
  if (ov.no_rvp) opt.toggles.road_visibility_prune = false;
  if (ov.no_otp) opt.toggles.object_type_prune = false;
  if (ov.no_geo3d) opt.toggles.geometry_estimate = false;
  if (ov.no_efs) opt.toggles.exit_frame_sample = false;
}

struct LoadedWorkflow {
  io::WorkflowFile file;
  fs::path base_dir;
};

LoadedWorkflow load(const std::string& path) {
  LoadedWorkflow lw;
  lw.file = io::load_workflow(path);
  lw.base_dir = fs::path(path).parent_path();
  return lw;
}

workflow::World build_world(const LoadedWorkflow& lw, const Overrides& ov) {
  workflow::World w;
  apply_options(w.options(), lw.file, ov);
  if (!lw.file.road_network_path.empty())
    w.add_geog_constructs(io::load_road_network(resolve(lw.file.road_network_path, lw.base_dir)));
  for (const io::WorkflowFile::Video& v : lw.file.videos)
    w.add_video(io::load_camera_config(resolve(v.camera_path, lw.base_dir)),
                io::load_detections(resolve(v.detections_path, lw.base_dir)),
                resolve(v.images_dir, lw.base_dir));
  for (const std::string& name : lw.file.objects) w.object(name);
  for (const std::string& name : predicate::object_names(lw.file.filter)) w.object(name);
  if (!lw.file.filter.empty()) w.filter(lw.file.filter);
  return w;
}

int cmd_plan(const std::string& workflow_path, const Overrides& ov) {
  const LoadedWorkflow lw = load(workflow_path);
  planner::PlannerOptions opt;
  apply_options(opt, lw.file, ov);
  const planner::ExecutionPlan plan = planner::make_plan(lw.file.filter, opt);
  std::fputs(planner::format_plan(plan).c_str(), stdout);
  return 0;
}

int cmd_run(const std::string& workflow_path, const Overrides& ov, std::string out_dir) {
  const LoadedWorkflow lw = load(workflow_path);
  workflow::World w = build_world(lw, ov);
  if (out_dir.empty()) out_dir = resolve(lw.file.out_dir, lw.base_dir);
  if (out_dir.empty()) out_dir = "out";

  workflow::ObserveResult res;
  if (lw.file.observe_mode == "save_frames") {
    res = w.save_frames({out_dir, lw.file.annotate, lw.file.padding});
  } else {
    res = w.get_objects();
    io::write_manifest_json(res, (fs::path(out_dir) / "manifest.json").string());
  }
  io::write_tracks(res.objects, (fs::path(out_dir) / "tracks.json").string());
  io::write_stats_json(res.stats, (fs::path(out_dir) / "stats.json").string());

  std::int64_t matches = 0;
  for (const workflow::VideoStats& v : res.stats.videos) matches += v.matches;
  std::printf("%zu objects, %lld matches -> %s\n", res.objects.size(),
              static_cast<long long>(matches), out_dir.c_str());
  return 0;
}

int cmd_stats(const std::string& workflow_path, const Overrides& ov, bool ablation) {
  const LoadedWorkflow lw = load(workflow_path);
  if (!ablation) {
    workflow::World w = build_world(lw, ov);
    const workflow::ObserveResult res = w.get_objects();
    std::fputs(io::format_stats(res.stats).c_str(), stdout);
    return 0;
  }

  RoadNetwork network;
  if (!lw.file.road_network_path.empty())
    network = io::load_road_network(resolve(lw.file.road_network_path, lw.base_dir));
  std::vector<VideoInput> videos;
  for (const io::WorkflowFile::Video& v : lw.file.videos)
    videos.push_back({io::load_camera_config(resolve(v.camera_path, lw.base_dir)),
                      io::load_detections(resolve(v.detections_path, lw.base_dir))});
  std::vector<std::string> vars = lw.file.objects;
  for (const std::string& name : predicate::object_names(lw.file.filter))
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);

  planner::PlannerOptions opt;
  apply_options(opt, lw.file, ov);
  const harness::AblationReport rep =
      harness::run_ablation(network, videos, lw.file.filter, vars, opt);
  std::fputs(harness::format_ablation(rep).c_str(), stdout);
  return 0;
}

int cmd_synth(const std::string& scene_name, std::uint64_t seed, const std::string& out_dir) {
  harness::SceneSpec spec;
  if (scene_name == "straight_lane")
    spec = harness::straight_lane_scene(seed);
  else if (scene_name == "intersection")
    spec = harness::intersection_scene(seed);
  else if (scene_name == "pan_away")
    spec = harness::pan_away_scene(seed);
  else if (scene_name == "two_car")
    spec = harness::two_car_scene(seed);
  else
    spec = harness::random_scene(seed);
  const harness::Scene scene = harness::generate_scene(spec);
  io::write_scene(scene, out_dir);
  std::printf("%s scene (seed %llu): %zu frames, %zu detections -> %s\n", scene_name.c_str(),
              static_cast<unsigned long long>(seed), scene.camera.frames.size(),
              scene.detections.size(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geospatial video analytics workflows"};
  app.require_subcommand(1);

  std::string workflow_path;
  std::string out_dir;
  Overrides ov;

  CLI::App* plan = app.add_subcommand("plan", "Print the execution plan for a workflow's filter");
  plan->add_option("--workflow", workflow_path, "Workflow JSON file")->required();
  add_override_flags(plan, ov);

  CLI::App* run = app.add_subcommand("run", "Run a workflow and write its outputs");
  run->add_option("--workflow", workflow_path, "Workflow JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the file)");
  add_override_flags(run, ov);

  bool ablation = false;
  CLI::App* stats = app.add_subcommand("stats", "Run a workflow and print work statistics");
  stats->add_option("--workflow", workflow_path, "Workflow JSON file")->required();
  stats->add_flag("--ablation", ablation,
                  "Compare optimization subsets against the unoptimized baseline");
  add_override_flags(stats, ov);

  std::string scene_name = "random";
  std::uint64_t seed = 1;
  std::string synth_out = "scene";
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene's input files");
  synth->add_option("--scene", scene_name, "Scene kind")
      ->check(CLI::IsMember({"straight_lane", "intersection", "pan_away", "two_car", "random"}));
  synth->add_option("--seed", seed, "Scene seed");
  synth->add_option("--out", synth_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) return cmd_plan(workflow_path, ov);
    if (run->parsed()) return cmd_run(workflow_path, ov, out_dir);
    if (stats->parsed()) return cmd_stats(workflow_path, ov, ablation);
    if (synth->parsed()) return cmd_synth(scene_name, seed, synth_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
