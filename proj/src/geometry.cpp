#include "liftguard/geometry.hpp"

#include <cmath>

#include <Eigen/LU>

#include "liftguard/error.hpp"

namespace liftguard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NonOrthonormalRotation: return "NonOrthonormalRotation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::UnorderedStream: return "UnorderedStream";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::ZeroGroundTruth: return "ZeroGroundTruth";
    case ErrorCode::NoClasses: return "NoClasses";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive and finite");
  }
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::NonOrthonormalRotation, "non-finite transform entries");
  }
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  const double ortho_err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det_err = std::abs(rotation.determinant() - 1.0);
  if (ortho_err > kRotationTolerance || det_err > kRotationTolerance) {
    throw Error(ErrorCode::NonOrthonormalRotation,
                "rotation deviates from SO(3): max |R^T R - I| = " + std::to_string(ortho_err) +
                    ", |det - 1| = " + std::to_string(det_err));
  }
}

RigidTransform RigidTransform::from_homogeneous(const Eigen::Matrix4d& m) {
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRotationTolerance) {
    throw Error(ErrorCode::NonOrthonormalRotation, "homogeneous bottom row must be (0, 0, 0, 1)");
  }
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return RigidTransform(Unchecked{}, rt, -(rt * translation_));
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(RigidTransform::Unchecked{}, a.rotation_ * b.rotation_,
                        a.rotation_ * b.translation_ + a.translation_);
}

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& p) {
  return t.apply(p);
}

RigidTransform invert_rigid(const RigidTransform& t) { return t.inverse(); }

CalibrationBundle::CalibrationBundle(Intrinsics intrinsics, RigidTransform lidar_to_camera,
                                     RigidTransform world_to_lidar, int image_width,
                                     int image_height)
    : intrinsics_(intrinsics),
      lidar_to_camera_(lidar_to_camera),
      world_to_lidar_(world_to_lidar),
      camera_to_lidar_(lidar_to_camera.inverse()),
      lidar_to_world_(world_to_lidar.inverse()),
      image_width_(image_width),
      image_height_(image_height) {
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  }
}

CameraPoint CalibrationBundle::to_camera(const LidarPoint& p) const {
  return CameraPoint(lidar_to_camera_.apply(p.xyz));
}

LidarPoint CalibrationBundle::to_lidar(const CameraPoint& p) const {
  return LidarPoint(camera_to_lidar_.apply(p.xyz));
}

LidarPoint CalibrationBundle::to_lidar(const WorldPoint& p) const {
  return LidarPoint(world_to_lidar_.apply(p.xyz));
}

WorldPoint CalibrationBundle::to_world(const LidarPoint& p) const {
  return WorldPoint(lidar_to_world_.apply(p.xyz));
}

bool CalibrationBundle::in_image(double u, double v) const {
  return u >= 0.0 && v >= 0.0 && u < image_width_ && v < image_height_;
}

PixelPoint camera_to_pixel(const CameraPoint& p, const Intrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "camera point at z = " + std::to_string(p.z()));
  }
  return PixelPoint{k.fx() * p.x() / p.z() + k.cx(), k.fy() * p.y() / p.z() + k.cy(), p.z()};
}

CameraPoint pixel_to_camera(const PixelPoint& p, const Intrinsics& k) {
  if (!p.depth || !(*p.depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "pixel depth missing or non-positive");
  }
  const double z = *p.depth;
  return CameraPoint((p.u - k.cx()) * z / k.fx(), (p.v - k.cy()) * z / k.fy(), z);
}

WorldPoint pixel_depth_to_world(const PixelPoint& p, const CalibrationBundle& calib) {
  const CameraPoint pc = pixel_to_camera(p, calib.intrinsics());
  return calib.to_world(calib.to_lidar(pc));
}

PixelPoint world_to_pixel(const WorldPoint& p, const CalibrationBundle& calib) {
  return camera_to_pixel(calib.to_camera(calib.to_lidar(p)), calib.intrinsics());
}

}  // namespace liftguard
