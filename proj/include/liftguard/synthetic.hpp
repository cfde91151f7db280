#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "liftguard/detection.hpp"
#include "liftguard/geometry.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard {

// Default box sizes (x deep, y wide, z tall), meters.
inline const Eigen::Vector3d kDefaultMicDims{3.0, 6.0, 3.0};
inline const Eigen::Vector3d kDefaultHumanDims{0.4, 0.5, 1.7};

// D455 intrinsics at 1280x800 with the calibrated D455/MID360 extrinsics and
// the LiDAR mounted 1.5 m above the world origin, axes aligned with the world
// (x forward, y left, z up).
CalibrationBundle default_synthetic_calibration();

struct SceneObject {
  ClassLabel label = ClassLabel::Human;
  WorldPoint center;
  Eigen::Vector3d dims = kDefaultHumanDims;  // axis-aligned in the world frame
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  CalibrationBundle calib = default_synthetic_calibration();
  double density = 400.0;        // surface points per m^2
  double noise_sigma = 0.02;     // m, Gaussian on range
  double ground_density = 0.0;   // points per m^2 on z = 0; 0 disables
  double box_jitter_px = 0.0;    // Gaussian jitter on observed box edges
  double dropout_rate = 0.0;     // probability an observed detection is missing
  double detection_confidence = 0.9;
  std::uint64_t seed = 7;
};

struct SyntheticScene {
  PointCloud cloud;                       // LiDAR frame
  std::vector<Detection> ground_truth;    // exact projected boxes, confidence 1
  std::vector<Detection> detections;      // jittered / dropped, as a detector would report
  std::vector<std::optional<std::size_t>> gt_object;  // ground_truth[i] -> objects index
  std::vector<std::size_t> points_per_object;         // surviving LiDAR returns per object
};

// Throws InvalidSpec on non-positive density or dimensions, negative noise,
// or a dropout rate outside [0, 1].
void validate(const SceneSpec& spec);

// Samples the LiDAR-facing faces of every box (returns hidden behind another
// box are removed), perturbs range with Gaussian noise, and projects box
// corners through the calibration for the 2-D boxes. Boxes with a corner
// behind the camera or no area inside the image get no detection.
// Deterministic for a given seed.
SyntheticScene generate_scene(const SceneSpec& spec);

// Exact 2-D box of a world-aligned 3-D box, clamped to the image.
std::optional<BBox> project_box(const SceneObject& obj, const CalibrationBundle& calib);

// Camera-frame depth of a world point.
double camera_depth(const WorldPoint& p, const CalibrationBundle& calib);

// ---------------------------------------------------------------------------
// Scripted lifts written out as replay bundles

struct Keyframe {
  double t = 0.0;
  double a = 0.0;  // height for the MiC trajectory, x for human paths
  double b = 0.0;  // unused for the MiC trajectory, y for human paths
};

struct HumanPath {
  Eigen::Vector3d dims = kDefaultHumanDims;
  std::vector<Keyframe> path;  // (t, x, y); piecewise linear, clamped at the ends
};

struct LiftSpec {
  SceneSpec scene;  // objects are ignored; the lift script places them
  Eigen::Vector3d mic_dims = kDefaultMicDims;
  double mic_x = 18.0;
  double mic_y = 0.0;
  double mic_base_z = 0.0;          // bottom face height before lifting
  std::vector<Keyframe> trajectory; // (t, height above base)
  std::vector<HumanPath> humans;
  double duration = 0.0;            // s; 0 gives a single frame
  double camera_fps = 30.0;
  double lidar_hz = 10.0;
};

void validate(const LiftSpec& spec);

// Scene objects at time t.
std::vector<SceneObject> lift_objects_at(const LiftSpec& spec, double t);

struct LiftBundleInfo {
  std::size_t frames = 0;
  std::size_t clouds = 0;
};

// Writes manifest.json, calib.json, truth.json, clouds/NNNNNN.ply,
// detections/NNNNNN.json and ground_truth/NNNNNN.json under out_dir.
// Per-frame randomness is seeded with seed ^ index, so output is identical
// regardless of thread count.
LiftBundleInfo generate_lift(const LiftSpec& spec, const std::filesystem::path& out_dir);

// JSON lift script. "calibration" may be inline or a path relative to the
// spec file. Throws InvalidSpec / ParseError.
LiftSpec parse_lift_spec(const std::string& text, const std::filesystem::path& base_dir);
LiftSpec load_lift_spec(const std::filesystem::path& path);

}  // namespace liftguard
