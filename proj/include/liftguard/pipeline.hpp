#pragma once

#include <filesystem>
#include <string>

#include "liftguard/depth_cluster.hpp"
#include "liftguard/frame_sync.hpp"
#include "liftguard/geometry.hpp"
#include "liftguard/pointcloud.hpp"
#include "liftguard/safety.hpp"

namespace liftguard {

struct PipelineConfig {
  DepthEstimateParams depth;
  OcclusionParams occlusion;
  double danger_radius = 3.0;  // m
  AlarmConfig alarm;
  ComplianceParams compliance;

  bool denoise_enabled = true;
  DenoiseParams denoise;
  double voxel_size = 0.05;  // m; 0 disables downsampling

  double sync_tolerance = kDefaultSyncTolerance;

  // Vertical offsets applied when the MiC itself is not detected and the
  // rigging above it stands in.
  double mic_frame_z_offset = 1.5;
  double hook_z_offset = 1.5;

  // Optional push along the viewing ray from the observed surface toward the
  // object's center (m). Zero keeps the raw surface position.
  double mic_surface_offset = 0.0;
  double human_surface_offset = 0.0;
};

// JSON document; absent keys keep their defaults, unknown keys are rejected
// (ParseError) as are out-of-range values (InvalidArgument).
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string dump_config(const PipelineConfig& config);

// Denoise then voxel-downsample per the config. Empty clouds pass through.
PointCloud preprocess_cloud(const PointCloud& cloud, const PipelineConfig& config);

// One synchronized frame through the whole perception chain: preprocess,
// depth image, per-detection depth estimate, back-projection to world,
// danger zone and intruder test. Pure and deterministic.
SafetyVerdict process_frame(const FramePair& pair, const CalibrationBundle& calib,
                            const PipelineConfig& config);

// Same chain on an already rendered depth image.
SafetyVerdict evaluate_frame(const std::vector<Detection>& detections, const DepthImage& depth,
                             const CalibrationBundle& calib, const PipelineConfig& config,
                             double timestamp);

}  // namespace liftguard
