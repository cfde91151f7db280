#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "liftguard/cli.hpp"
#include "liftguard/logging.hpp"

using namespace liftguard::cli;

int main(int argc, char** argv) {
  liftguard::init_logging();

  CLI::App app{"liftguard: camera-LiDAR safety monitoring for crane lifts"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"table", Format::Table}, {"records", Format::Records}};
  auto add_format = [&](CLI::App* cmd, Format& f) {
    cmd->add_option("--format", f, "table|records")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };

  ReplayOptions replay;
  std::string replay_calib, replay_config, replay_out;
  auto* c_replay = app.add_subcommand("replay", "run the pipeline over a replay manifest");
  c_replay->add_option("--manifest", replay.manifest, "manifest.json")->required();
  c_replay->add_option("--calib", replay_calib, "calibration JSON (default: the manifest's)");
  c_replay->add_option("--config", replay_config, "pipeline config JSON");
  c_replay->add_option("--out", replay_out, "output directory for events.ndjson and summary.json");
  add_format(c_replay, replay.format);

  EvalDetectOptions detect;
  auto* c_detect = app.add_subcommand("eval-detect", "score detection files against ground truth");
  c_detect->add_option("detections", detect.detections_dir, "directory of detection JSON files")->required();
  c_detect->add_option("ground_truth", detect.ground_truth_dir, "directory of ground-truth JSON files")->required();
  c_detect->add_option("--iou-thresh", detect.iou_thresholds, "IoU threshold (repeatable)")
      ->check(CLI::Range(0.0, 1.0));
  add_format(c_detect, detect.format);

  EvalLocalizeOptions localize;
  std::string localize_truth;
  auto* c_localize = app.add_subcommand("eval-localize", "distance error between localized and true positions");
  c_localize->add_option("input", localize.input, "pairs CSV or replay event log")->required();
  c_localize->add_option("--truth", localize_truth, "truth JSON for an event log");
  add_format(c_localize, localize.format);

  SynthOptions synth;
  unsigned long long synth_seed = 0;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic replay bundle from a lift script");
  c_synth->add_option("spec", synth.spec, "lift script JSON")->required();
  c_synth->add_option("--out", synth.out, "output directory")->required();
  auto* seed_opt = c_synth->add_option("--seed", synth_seed, "override the script's seed");

  DepthImageOptions depth;
  std::string depth_config;
  auto* c_depth = app.add_subcommand("depth-image", "render a point cloud to a 16-bit depth image");
  c_depth->add_option("cloud", depth.cloud, "PLY or CSV cloud")->required();
  c_depth->add_option("--calib", depth.calib, "calibration JSON")->required();
  c_depth->add_option("--out", depth.out, "output .pgm")->required();
  c_depth->add_option("--config", depth_config, "denoise/downsample per this config first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (c_replay->parsed()) {
    if (!replay_calib.empty()) replay.calib = replay_calib;
    if (!replay_config.empty()) replay.config = replay_config;
    if (!replay_out.empty()) replay.out = replay_out;
    return cmd_replay(replay, std::cout, std::cerr);
  }
  if (c_detect->parsed()) return cmd_eval_detect(detect, std::cout, std::cerr);
  if (c_localize->parsed()) {
    if (!localize_truth.empty()) localize.truth = localize_truth;
    return cmd_eval_localize(localize, std::cout, std::cerr);
  }
  if (c_synth->parsed()) {
    if (seed_opt->count() > 0) synth.seed = synth_seed;
    return cmd_synth(synth, std::cout, std::cerr);
  }
  if (!depth_config.empty()) depth.config = depth_config;
  return cmd_depth_image(depth, std::cout, std::cerr);
}
