#pragma once

// Shared building blocks of the parallel kernels and their serial references.
// Both paths must call these so their floating-point results agree bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "liftguard/error.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard::detail {

inline double point_distance(const LidarPoint& a, const LidarPoint& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline void validate_denoise(const PointCloud& cloud, const DenoiseParams& params) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "denoise on an empty cloud");
  if (params.k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "k_neighbors must be >= 1");
  if (!(params.std_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "std_ratio must be > 0");
}

// Mean of an ascending-sorted list of neighbour distances.
inline double mean_of_sorted(std::span<const double> sorted) {
  double sum = 0.0;
  for (double d : sorted) sum += d;
  return sum / static_cast<double>(sorted.size());
}

// Keeps points whose statistic is within mean + ratio * stddev.
inline PointCloud apply_fence(const PointCloud& cloud, std::span<const double> mean_dist,
                              double std_ratio) {
  const double n = static_cast<double>(mean_dist.size());
  double mean = 0.0;
  for (double d : mean_dist) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : mean_dist) var += (d - mean) * (d - mean);
  const double fence = mean + std_ratio * std::sqrt(var / n);

  PointCloud out;
  out.timestamp = cloud.timestamp;
  out.points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!(mean_dist[i] > fence)) out.points.push_back(cloud.points[i]);
  }
  return out;
}

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_key(const LidarPoint& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

inline void validate_voxel(const PointCloud& cloud, double voxel) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "voxel_downsample on an empty cloud");
  if (!(voxel > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be > 0");
}

struct Projection {
  int index = -1;  // row-major pixel index, -1 when the point misses the image
  double depth = 0.0;
};

inline Projection project_point(const LidarPoint& p, const CalibrationBundle& calib) {
  const CameraPoint pc = calib.to_camera(p);
  if (!(pc.z() > 0.0)) return {};
  const Intrinsics& k = calib.intrinsics();
  const double u = k.fx() * pc.x() / pc.z() + k.cx();
  const double v = k.fy() * pc.y() / pc.z() + k.cy();
  if (!calib.in_image(u, v)) return {};
  const int iu = static_cast<int>(u);
  const int iv = static_cast<int>(v);
  return {iv * calib.image_width() + iu, pc.z()};
}

}  // namespace liftguard::detail
