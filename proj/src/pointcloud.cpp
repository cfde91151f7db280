#include "liftguard/pointcloud.hpp"

#include <algorithm>
#include <numeric>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "kernel_common.hpp"

namespace liftguard {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

DepthImage::DepthImage(int width, int height, double timestamp)
    : width_(width), height_(height), timestamp_(timestamp) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "depth image dimensions must be positive");
  }
  depth_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
}

std::optional<double> DepthImage::at(int u, int v) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return std::nullopt;
  const double d = depth_[static_cast<std::size_t>(v) * width_ + u];
  if (d > 0.0) return d;
  return std::nullopt;
}

void DepthImage::offer(int u, int v, double depth) {
  if (u < 0 || v < 0 || u >= width_ || v >= height_ || !(depth > 0.0)) return;
  double& slot = depth_[static_cast<std::size_t>(v) * width_ + u];
  if (slot == 0.0 || depth < slot) slot = depth;
}

std::size_t DepthImage::populated_count() const {
  return static_cast<std::size_t>(
      std::count_if(depth_.begin(), depth_.end(), [](double d) { return d > 0.0; }));
}

PointCloud denoise(const PointCloud& cloud, const DenoiseParams& params) {
  detail::validate_denoise(cloud, params);
  const std::size_t n = cloud.size();
  if (n == 1) return cloud;

  using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
  using Entry = std::pair<BPoint, std::size_t>;
  std::vector<Entry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = cloud.points[i];
    entries[i] = {BPoint(p.x(), p.y(), p.z()), i};
  }
  const bgi::rtree<Entry, bgi::quadratic<16>> tree(entries.begin(), entries.end());

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k_neighbors), n - 1);
  std::vector<double> mean_dist(n);

#pragma omp parallel
  {
    std::vector<Entry> hits;
    std::vector<double> dists;
    hits.reserve(k + 1);
    dists.reserve(k + 1);
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      hits.clear();
      dists.clear();
      tree.query(bgi::nearest(entries[i].first, static_cast<unsigned>(k + 1)),
                 std::back_inserter(hits));
      for (const auto& h : hits) {
        if (h.second != i) dists.push_back(detail::point_distance(cloud.points[i], cloud.points[h.second]));
      }
      std::sort(dists.begin(), dists.end());
      mean_dist[i] = detail::mean_of_sorted(std::span<const double>(dists.data(), k));
    }
  }
  return detail::apply_fence(cloud, mean_dist, params.std_ratio);
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  detail::validate_voxel(cloud, voxel);
  const std::size_t n = cloud.size();
  std::vector<detail::VoxelKey> keys(n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    keys[i] = detail::voxel_key(cloud.points[i], voxel);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<std::size_t> group_start;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || keys[order[i]] != keys[order[i - 1]]) group_start.push_back(i);
  }
  group_start.push_back(n);

  PointCloud out;
  out.timestamp = cloud.timestamp;
  out.points.resize(group_start.size() - 1);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(out.points.size()); ++g) {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (std::size_t i = group_start[g]; i < group_start[g + 1]; ++i) {
      const auto& p = cloud.points[order[i]];
      sx += p.x();
      sy += p.y();
      sz += p.z();
    }
    const double count = static_cast<double>(group_start[g + 1] - group_start[g]);
    out.points[g] = LidarPoint(sx / count, sy / count, sz / count);
  }
  return out;
}

DepthImage render_depth_image(const PointCloud& cloud, const CalibrationBundle& calib) {
  DepthImage image(calib.image_width(), calib.image_height(), cloud.timestamp);
  const std::size_t n = cloud.size();
  std::vector<detail::Projection> projected(n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    projected[i] = detail::project_point(cloud.points[i], calib);
  }

  const int width = calib.image_width();
  for (const auto& p : projected) {
    if (p.index >= 0) image.offer(p.index % width, p.index / width, p.depth);
  }
  return image;
}

}  // namespace liftguard
