#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "liftguard/geometry.hpp"

namespace liftguard {

struct PointCloud {
  std::vector<LidarPoint> points;
  double timestamp = 0.0;  // seconds on the stream clock

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Sparse per-pixel nearest camera-frame depth. A stored value of 0 marks an
// empty pixel; populated pixels are strictly positive.
class DepthImage {
 public:
  DepthImage(int width, int height, double timestamp = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double timestamp() const { return timestamp_; }

  std::optional<double> at(int u, int v) const;
  // Keeps the nearer of the current and the offered depth.
  void offer(int u, int v, double depth);

  std::size_t populated_count() const;
  const std::vector<double>& raw() const { return depth_; }

  friend bool operator==(const DepthImage&, const DepthImage&) = default;

 private:
  int width_;
  int height_;
  double timestamp_;
  std::vector<double> depth_;
};

struct DenoiseParams {
  int k_neighbors = 16;
  double std_ratio = 2.0;
};

// Statistical outlier removal. A point is dropped iff the mean distance to its
// k nearest neighbours exceeds mean + std_ratio * stddev of that statistic
// over the cloud. Survivors keep their input order. Throws EmptyCloud.
PointCloud denoise(const PointCloud& cloud, const DenoiseParams& params = {});

// One centroid per occupied voxel, ordered by voxel index (x, then y, then z).
// Throws EmptyCloud.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

// Projects every point through lidar_to_camera and the intrinsics. Points in
// front of the camera that land inside the image populate floor(u), floor(v);
// collisions keep the smallest Z_c.
DepthImage render_depth_image(const PointCloud& cloud, const CalibrationBundle& calib);

// Serial reference kernels. They define the expected output of the parallel
// kernels above and are kept for tests and benchmarks.
namespace reference {
PointCloud denoise(const PointCloud& cloud, const DenoiseParams& params = {});
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);
DepthImage render_depth_image(const PointCloud& cloud, const CalibrationBundle& calib);
}  // namespace reference

}  // namespace liftguard
