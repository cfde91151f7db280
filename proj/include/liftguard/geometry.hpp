#pragma once

#include <optional>

#include <Eigen/Core>

namespace liftguard {

// Rotation validity tolerance (per matrix entry) for calibration inputs.
inline constexpr double kRotationTolerance = 1e-6;

// A 3-D point bound to one coordinate frame. Frames never convert
// implicitly; crossing a frame boundary goes through a CalibrationBundle.
template <class Frame>
struct FramePoint {
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();

  FramePoint() = default;
  explicit FramePoint(const Eigen::Vector3d& v) : xyz(v) {}
  FramePoint(double x, double y, double z) : xyz(x, y, z) {}

  double x() const { return xyz.x(); }
  double y() const { return xyz.y(); }
  double z() const { return xyz.z(); }

  friend bool operator==(const FramePoint& a, const FramePoint& b) { return a.xyz == b.xyz; }
};

struct CameraFrame {};
struct LidarFrame {};
struct WorldFrame {};

using CameraPoint = FramePoint<CameraFrame>;
using LidarPoint = FramePoint<LidarFrame>;
using WorldPoint = FramePoint<WorldFrame>;

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  std::optional<double> depth;  // Z_c in meters, when known
};

// Pinhole intrinsics; lens distortion is not modeled.
class Intrinsics {
 public:
  // Throws InvalidArgument unless fx > 0 and fy > 0.
  Intrinsics(double fx, double fy, double cx, double cy);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

  Eigen::Matrix3d matrix() const;

 private:
  double fx_, fy_, cx_, cy_;
};

// Proper rigid motion p -> R p + t. Construction validates the rotation, so
// every live instance is orthonormal with det +1 to kRotationTolerance.
class RigidTransform {
 public:
  RigidTransform() = default;  // identity

  // Throws NonOrthonormalRotation when R^T R != I or det(R) != 1 beyond
  // kRotationTolerance. Inputs are never re-orthonormalized.
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  // Row-major homogeneous 4x4; the bottom row must be (0, 0, 0, 1).
  static RigidTransform from_homogeneous(const Eigen::Matrix4d& m);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d homogeneous() const;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

 private:
  struct Unchecked {};
  RigidTransform(Unchecked, const Eigen::Matrix3d& r, const Eigen::Vector3d& t)
      : rotation_(r), translation_(t) {}

  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& p);
RigidTransform invert_rigid(const RigidTransform& t);

// Intrinsics plus the two calibrated extrinsics: lidar_to_camera maps LiDAR
// coordinates into the camera frame and world_to_lidar maps world
// coordinates into the LiDAR frame. The inverse chain is cached.
class CalibrationBundle {
 public:
  CalibrationBundle(Intrinsics intrinsics, RigidTransform lidar_to_camera,
                    RigidTransform world_to_lidar, int image_width, int image_height);

  const Intrinsics& intrinsics() const { return intrinsics_; }
  const RigidTransform& lidar_to_camera() const { return lidar_to_camera_; }
  const RigidTransform& world_to_lidar() const { return world_to_lidar_; }
  const RigidTransform& camera_to_lidar() const { return camera_to_lidar_; }
  const RigidTransform& lidar_to_world() const { return lidar_to_world_; }
  int image_width() const { return image_width_; }
  int image_height() const { return image_height_; }

  CameraPoint to_camera(const LidarPoint& p) const;
  LidarPoint to_lidar(const CameraPoint& p) const;
  LidarPoint to_lidar(const WorldPoint& p) const;
  WorldPoint to_world(const LidarPoint& p) const;

  // Pixel bounds check using the truncation convention of the depth image.
  bool in_image(double u, double v) const;

 private:
  Intrinsics intrinsics_;
  RigidTransform lidar_to_camera_;
  RigidTransform world_to_lidar_;
  RigidTransform camera_to_lidar_;
  RigidTransform lidar_to_world_;
  int image_width_;
  int image_height_;
};

// Throws NonPositiveDepth when p.z() <= 0.
PixelPoint camera_to_pixel(const CameraPoint& p, const Intrinsics& k);

// Throws NonPositiveDepth when the depth is missing or <= 0.
CameraPoint pixel_to_camera(const PixelPoint& p, const Intrinsics& k);

// Full back-projection chain: pixel + depth -> camera -> LiDAR -> world.
WorldPoint pixel_depth_to_world(const PixelPoint& p, const CalibrationBundle& calib);

// Forward chain world -> LiDAR -> camera -> pixel. Throws NonPositiveDepth
// for points behind the camera.
PixelPoint world_to_pixel(const WorldPoint& p, const CalibrationBundle& calib);

}  // namespace liftguard
