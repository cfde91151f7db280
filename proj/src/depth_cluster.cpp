#include "liftguard/depth_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "liftguard/error.hpp"

namespace liftguard {

std::string_view to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::KMeans: return "kmeans";
    case ClusterMethod::Averaging: return "averaging";
    case ClusterMethod::MeanShift: return "mean_shift";
  }
  return "unknown";
}

ClusterMethod parse_cluster_method(std::string_view text) {
  for (ClusterMethod m : {ClusterMethod::KMeans, ClusterMethod::Averaging, ClusterMethod::MeanShift}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::ParseError, "unknown clustering method '" + std::string(text) + "'");
}

DepthSamples extract_bbox_depths(const DepthImage& img, const BBox& bbox) {
  const int u0 = std::max(0, static_cast<int>(std::floor(bbox.u_min)));
  const int v0 = std::max(0, static_cast<int>(std::floor(bbox.v_min)));
  const int u1 = std::min(img.width(), static_cast<int>(std::ceil(bbox.u_max)));
  const int v1 = std::min(img.height(), static_cast<int>(std::ceil(bbox.v_max)));
  DepthSamples out;
  for (int v = v0; v < v1; ++v) {
    for (int u = u0; u < u1; ++u) {
      if (const auto d = img.at(u, v)) out.push_back(*d);
    }
  }
  return out;
}

namespace {

double sorted_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> sorted_copy(std::span<const double> s) {
  std::vector<double> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

std::size_t nearest_center(double x, std::span<const double> centers) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < centers.size(); ++c) {
    if (std::abs(x - centers[c]) < std::abs(x - centers[best])) best = c;
  }
  return best;
}

double sse(std::span<const double> s, std::span<const std::size_t> assign,
           std::span<const double> centers) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s[i] - centers[assign[i]];
    total += r * r;
  }
  return total;
}

// One Lloyd step: assign to nearest, move centers to member means (empty
// clusters keep their center). Returns the largest center movement.
double lloyd_step(std::span<const double> s, std::vector<double>& centers,
                  std::vector<std::size_t>& assign) {
  const std::size_t k = centers.size();
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    assign[i] = nearest_center(s[i], centers);
    sum[assign[i]] += s[i];
    ++count[assign[i]];
  }
  double moved = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    const double next = sum[c] / static_cast<double>(count[c]);
    moved = std::max(moved, std::abs(next - centers[c]));
    centers[c] = next;
  }
  return moved;
}

// Optimal contiguous k-partition of sorted data (1-D k-means optimum),
// divide-and-conquer dynamic programme over prefix sums. Returns the means.
std::vector<double> optimal_partition_means(std::span<const double> sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  const double shift = sorted[n / 2];
  std::vector<double> p1(n + 1, 0.0), p2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sorted[i] - shift;
    p1[i + 1] = p1[i] + x;
    p2[i + 1] = p2[i] + x * x;
  }
  auto cost = [&](std::size_t i, std::size_t j) {  // SSE of [i, j)
    const double m = static_cast<double>(j - i);
    const double s = p1[j] - p1[i];
    return std::max(0.0, (p2[j] - p2[i]) - s * s / m);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> split(k + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) dp[1][j] = cost(0, j);

  for (std::size_t m = 2; m <= k; ++m) {
    // dp[m][j] for j in [lo, hi], optimal split known to lie in [opt_lo, opt_hi]
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t opt_lo,
                     std::size_t opt_hi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      double best = inf;
      std::size_t best_i = std::max(opt_lo, m - 1);
      for (std::size_t i = std::max(opt_lo, m - 1); i <= std::min(opt_hi, mid - 1); ++i) {
        const double v = dp[m - 1][i] + cost(i, mid);
        if (v < best) {
          best = v;
          best_i = i;
        }
      }
      dp[m][mid] = best;
      split[m][mid] = best_i;
      if (mid > lo) self(self, lo, mid - 1, opt_lo, best_i);
      self(self, mid + 1, hi, best_i, opt_hi);
    };
    solve(solve, m, n, m - 1, n - 1);
  }

  std::vector<double> means(k);
  std::size_t end = n;
  for (std::size_t m = k; m >= 1; --m) {
    const std::size_t begin = m == 1 ? 0 : split[m][end];
    means[m - 1] = std::accumulate(sorted.begin() + static_cast<std::ptrdiff_t>(begin),
                                   sorted.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
                   static_cast<double>(end - begin);
    end = begin;
  }
  return means;
}

// Reorders centers ascending and remaps assignments to match.
void sort_centers(ClusterResult& r) {
  std::vector<std::size_t> order(r.centers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.centers[a] < r.centers[b]; });
  std::vector<std::size_t> rank(order.size());
  std::vector<double> centers(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    rank[order[i]] = i;
    centers[i] = r.centers[order[i]];
  }
  r.centers = std::move(centers);
  for (auto& a : r.assignments) a = rank[a];
}

std::vector<double> member_values(std::span<const double> s, const ClusterResult& r, std::size_t c) {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r.assignments[i] == c) out.push_back(s[i]);
  }
  return out;
}

}  // namespace

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptySamples, "quantile of an empty sample");
  const auto sorted = sorted_copy(values);
  return sorted_quantile(sorted, q);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

DepthSamples remove_depth_outliers(std::span<const double> s) {
  if (s.empty()) return {};
  const auto sorted = sorted_copy(s);
  const double q1 = sorted_quantile(sorted, 0.25);
  const double q3 = sorted_quantile(sorted, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 1.5 * iqr;
  const double hi = q3 + 1.5 * iqr;
  DepthSamples out;
  out.reserve(s.size());
  for (double v : s) {
    if (v >= lo && v <= hi) out.push_back(v);
  }
  return out;
}

ClusterResult kmeans_1d(std::span<const double> s, std::size_t k, const KMeansParams& params) {
  if (k != 2 && k != 3) throw Error(ErrorCode::InvalidArgument, "kmeans_1d supports k = 2 or 3");
  if (s.size() < k) {
    throw Error(ErrorCode::TooFewSamples,
                std::to_string(s.size()) + " samples for " + std::to_string(k) + " clusters");
  }
  const auto sorted = sorted_copy(s);

  ClusterResult r;
  r.assignments.assign(s.size(), 0);
  if (k == 2) {
    r.centers = {sorted_quantile(sorted, 0.25), sorted_quantile(sorted, 0.75)};
  } else {
    r.centers = {sorted_quantile(sorted, 0.17), sorted_quantile(sorted, 0.50),
                 sorted_quantile(sorted, 0.83)};
  }

  for (std::size_t it = 0; it < params.max_iter; ++it) {
    const double moved = lloyd_step(s, r.centers, r.assignments);
    ++r.iterations;
    r.inertia_history.push_back(sse(s, r.assignments, r.centers));
    if (moved < params.tol) break;
  }
  r.inertia = r.inertia_history.back();

  // Lloyd from fixed seeds can stall in a local optimum; in 1-D the global
  // optimum is a contiguous split of the sorted data and is cheap to find.
  std::vector<double> exact = optimal_partition_means(sorted, k);
  std::vector<std::size_t> exact_assign(s.size(), 0);
  for (std::size_t pass = 0; pass < params.max_iter; ++pass) {
    if (lloyd_step(s, exact, exact_assign) == 0.0) break;
  }
  const double exact_inertia = sse(s, exact_assign, exact);
  if (exact_inertia < r.inertia - 1e-12 * std::max(1.0, r.inertia)) {
    r.centers = std::move(exact);
    r.assignments = std::move(exact_assign);
    r.inertia = exact_inertia;
    r.inertia_history.push_back(exact_inertia);
    r.refined = true;
  }
  sort_centers(r);
  return r;
}

ClusterResult mean_shift_1d(std::span<const double> s, double bandwidth) {
  if (s.empty()) throw Error(ErrorCode::EmptySamples, "mean shift on an empty sample");
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be > 0");

  const auto sorted = sorted_copy(s);
  std::vector<double> prefix(sorted.size() + 1, 0.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) prefix[i + 1] = prefix[i] + sorted[i];

  auto window_mean = [&](double x) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - bandwidth) - sorted.begin();
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + bandwidth) - sorted.begin();
    return (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  };

  // Mode reached from each distinct start value.
  std::vector<double> starts = sorted;
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  std::vector<double> modes(starts.size());
  const double eps = 1e-9 * bandwidth;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    double x = starts[i];
    for (int it = 0; it < 1000; ++it) {
      const double next = window_mean(x);
      const bool done = std::abs(next - x) < eps;
      x = next;
      if (done) break;
    }
    modes[i] = x;
  }

  // Single-linkage merge of modes closer than bandwidth / 2.
  std::vector<std::size_t> order(modes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return modes[a] < modes[b]; });
  std::vector<std::size_t> group_of_start(starts.size());
  std::size_t groups = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || modes[order[i]] - modes[order[i - 1]] >= 0.5 * bandwidth) ++groups;
    group_of_start[order[i]] = groups - 1;
  }

  ClusterResult r;
  r.assignments.resize(s.size());
  std::vector<double> mode_sum(groups, 0.0);
  std::vector<std::size_t> count(groups, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto start = static_cast<std::size_t>(std::lower_bound(starts.begin(), starts.end(), s[i]) - starts.begin());
    const std::size_t g = group_of_start[start];
    r.assignments[i] = g;
    mode_sum[g] += modes[start];
    ++count[g];
  }
  r.centers.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) r.centers[g] = mode_sum[g] / static_cast<double>(count[g]);
  r.inertia = sse(s, r.assignments, r.centers);
  r.inertia_history = {r.inertia};
  r.iterations = 1;
  sort_centers(r);
  return r;
}

double averaging_depth(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorCode::EmptySamples, "average of an empty sample");
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

bool occlusion_check(const Detection& target, std::span<const Detection> others,
                     const DepthImage& depth_img, const OcclusionParams& params) {
  const double target_area = target.bbox.area();
  if (!(target_area > 0.0)) return false;
  DepthSamples target_depths;
  bool target_loaded = false;
  for (const Detection& other : others) {
    if (other == target) continue;
    const double inter = intersection_area(target.bbox, other.bbox);
    if (inter / target_area < params.min_overlap) continue;
    const BBox region{std::max(target.bbox.u_min, other.bbox.u_min), std::max(target.bbox.v_min, other.bbox.v_min),
                      std::min(target.bbox.u_max, other.bbox.u_max), std::min(target.bbox.v_max, other.bbox.v_max)};
    const DepthSamples region_depths = extract_bbox_depths(depth_img, region);
    if (region_depths.empty()) continue;
    if (!target_loaded) {
      target_depths = extract_bbox_depths(depth_img, target.bbox);
      target_loaded = true;
    }
    if (median(region_depths) <= median(target_depths) - params.min_depth_gap) return true;
  }
  return false;
}

double estimate_target_depth(std::span<const double> s, bool occluded, const DepthEstimateParams& params) {
  if (s.empty()) throw Error(ErrorCode::EmptySamples, "no depth samples for target");
  if (params.method == ClusterMethod::Averaging) return averaging_depth(s);

  ClusterResult r;
  std::size_t target = 0;
  if (params.method == ClusterMethod::KMeans) {
    const std::size_t k = occluded ? 3 : 2;
    if (s.size() < k) return median(s);
    r = kmeans_1d(s, k, params.kmeans);
    target = occluded ? 1 : 0;
  } else {
    r = mean_shift_1d(s, params.mean_shift_bandwidth);
    target = occluded ? std::min<std::size_t>(1, r.centers.size() - 1) : 0;
  }
  // Fall back toward nearer clusters if the chosen one ended up empty.
  for (std::size_t c = target + 1; c-- > 0;) {
    const auto members = member_values(s, r, c);
    if (!members.empty()) return median(members);
  }
  return median(s);
}

double evaluate_depth_rmse(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size() || estimates.empty()) {
    throw Error(ErrorCode::LengthMismatch, "RMSE needs equal, nonempty lists (" +
                                               std::to_string(estimates.size()) + " vs " +
                                               std::to_string(truth.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimates[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

}  // namespace liftguard
