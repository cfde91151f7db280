#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "liftguard/detection.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard {

// Camera-frame depths (m) harvested from one bounding box. May be empty.
using DepthSamples = std::vector<double>;

struct ClusterResult {
  std::vector<double> centers;             // ascending
  std::vector<std::size_t> assignments;    // per input sample, index into centers
  double inertia = 0.0;                    // sum of squared residuals, m^2
  std::vector<double> inertia_history;     // one entry per Lloyd step, nonincreasing
  std::size_t iterations = 0;
  bool refined = false;                    // exact 1-D pass improved on Lloyd
};

enum class ClusterMethod { KMeans, Averaging, MeanShift };

std::string_view to_string(ClusterMethod m);
ClusterMethod parse_cluster_method(std::string_view text);  // throws ParseError

struct KMeansParams {
  std::size_t max_iter = 100;
  double tol = 1e-4;  // m
};

struct OcclusionParams {
  double min_overlap = 0.2;    // intersection area / target area
  double min_depth_gap = 1.0;  // m, occluder must be at least this much nearer
};

struct DepthEstimateParams {
  ClusterMethod method = ClusterMethod::KMeans;
  KMeansParams kmeans;
  double mean_shift_bandwidth = 0.5;  // m
};

// Pixels (i, j) with floor(u_min) <= i < ceil(u_max), likewise for v, clipped
// to the image. Populated depths only, row-major.
DepthSamples extract_bbox_depths(const DepthImage& img, const BBox& bbox);

// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::span<const double> values, double q);
double median(std::span<const double> values);

// Tukey fence: drops values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; order kept.
DepthSamples remove_depth_outliers(std::span<const double> s);

// Lloyd iterations from quantile seeds (25/75th percentiles for k = 2,
// 17/50/83rd for k = 3), stopped when no center moves by tol or after
// max_iter steps. A closing exact 1-D pass over the sorted samples replaces
// the Lloyd partition when it finds strictly lower inertia, so the result is
// the global optimum. Throws TooFewSamples when |s| < k, InvalidArgument
// unless k is 2 or 3.
ClusterResult kmeans_1d(std::span<const double> s, std::size_t k, const KMeansParams& params = {});

// Flat-kernel mean shift started from every sample; modes closer than
// bandwidth / 2 merge. Throws EmptySamples / InvalidArgument.
ClusterResult mean_shift_1d(std::span<const double> s, double bandwidth);

// Throws EmptySamples.
double averaging_depth(std::span<const double> s);

// True iff some other box covers at least min_overlap of the target's area
// and the median depth inside that intersection is at least min_depth_gap
// nearer than the target box's median.
bool occlusion_check(const Detection& target, std::span<const Detection> others,
                     const DepthImage& depth_img, const OcclusionParams& params = {});

// Unoccluded: median of the nearest cluster (k = 2, foreground).
// Occluded: median of the second-nearest cluster (k = 3, midground).
// Averaging ignores occlusion and returns the mean. With fewer samples than
// clusters the plain median is returned. Throws EmptySamples.
double estimate_target_depth(std::span<const double> s, bool occluded,
                             const DepthEstimateParams& params = {});

// Throws LengthMismatch on unequal or empty inputs.
double evaluate_depth_rmse(std::span<const double> estimates, std::span<const double> truth);

}  // namespace liftguard
