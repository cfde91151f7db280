#include <algorithm>
#include <map>

#include "kernel_common.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard::reference {

PointCloud denoise(const PointCloud& cloud, const DenoiseParams& params) {
  detail::validate_denoise(cloud, params);
  const std::size_t n = cloud.size();
  if (n == 1) return cloud;

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k_neighbors), n - 1);
  std::vector<double> mean_dist(n);
  std::vector<double> dists;
  dists.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dists.push_back(detail::point_distance(cloud.points[i], cloud.points[j]));
    }
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
    mean_dist[i] = detail::mean_of_sorted(std::span<const double>(dists.data(), k));
  }
  return detail::apply_fence(cloud, mean_dist, params.std_ratio);
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  detail::validate_voxel(cloud, voxel);
  struct Accum {
    double x = 0.0, y = 0.0, z = 0.0;
    std::size_t count = 0;
  };
  std::map<detail::VoxelKey, Accum> grid;
  for (const auto& p : cloud.points) {
    Accum& a = grid[detail::voxel_key(p, voxel)];
    a.x += p.x();
    a.y += p.y();
    a.z += p.z();
    ++a.count;
  }
  PointCloud out;
  out.timestamp = cloud.timestamp;
  out.points.reserve(grid.size());
  for (const auto& [key, a] : grid) {
    const double c = static_cast<double>(a.count);
    out.points.emplace_back(a.x / c, a.y / c, a.z / c);
  }
  return out;
}

DepthImage render_depth_image(const PointCloud& cloud, const CalibrationBundle& calib) {
  DepthImage image(calib.image_width(), calib.image_height(), cloud.timestamp);
  const int width = calib.image_width();
  for (const auto& p : cloud.points) {
    const auto proj = detail::project_point(p, calib);
    if (proj.index >= 0) image.offer(proj.index % width, proj.index / width, proj.depth);
  }
  return image;
}

}  // namespace liftguard::reference
