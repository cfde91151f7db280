#include "liftguard/frame_sync.hpp"

#include <cmath>
#include <string>

#include "liftguard/error.hpp"

namespace liftguard {

namespace {

void check_ordered(std::span<const double> ts, const char* stream) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] >= 0.0) || (i > 0 && ts[i] < ts[i - 1])) {
      throw Error(ErrorCode::UnorderedStream,
                  std::string(stream) + " timestamps regress at index " + std::to_string(i));
    }
  }
}

void check_tolerance(double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "sync tolerance must be > 0");
}

}  // namespace

SyncResult match_timestamps(std::span<const double> image_ts, std::span<const double> cloud_ts,
                            double tolerance) {
  check_tolerance(tolerance);
  check_ordered(image_ts, "image");
  check_ordered(cloud_ts, "cloud");

  SyncResult result;
  std::vector<bool> used(cloud_ts.size(), false);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < image_ts.size(); ++i) {
    const double t = image_ts[i];
    while (lo < cloud_ts.size() && cloud_ts[lo] < t - tolerance) ++lo;
    std::size_t best = cloud_ts.size();
    double best_skew = 0.0;
    for (std::size_t c = lo; c < cloud_ts.size() && cloud_ts[c] <= t + tolerance; ++c) {
      const double skew = std::abs(cloud_ts[c] - t);
      if (used[c] || skew > tolerance) continue;
      if (best == cloud_ts.size() || skew < best_skew) {
        best = c;
        best_skew = skew;
      }
    }
    if (best == cloud_ts.size()) {
      ++result.dropped;
    } else {
      used[best] = true;
      result.matches.push_back({i, best, best_skew});
    }
  }
  return result;
}

PairedStreams pair_streams(std::span<const ImageFrame> images, std::span<const PointCloud> clouds,
                           double tolerance) {
  std::vector<double> its, cts;
  its.reserve(images.size());
  cts.reserve(clouds.size());
  for (const auto& im : images) its.push_back(im.timestamp);
  for (const auto& c : clouds) cts.push_back(c.timestamp);
  const SyncResult sync = match_timestamps(its, cts, tolerance);

  PairedStreams out;
  out.dropped = sync.dropped;
  out.pairs.reserve(sync.matches.size());
  for (const SyncMatch& m : sync.matches) {
    out.pairs.push_back({images[m.image_index].detections, clouds[m.cloud_index],
                         images[m.image_index].timestamp, clouds[m.cloud_index].timestamp, m.skew});
  }
  return out;
}

StreamingSynchronizer::StreamingSynchronizer(double tolerance) : tolerance_(tolerance) {
  check_tolerance(tolerance);
}

void StreamingSynchronizer::push_image(double ts) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "push after finish()");
  if (!(ts >= 0.0) || (next_image_ > 0 && ts < last_image_ts_)) {
    throw Error(ErrorCode::UnorderedStream, "image timestamps regress at index " + std::to_string(next_image_));
  }
  last_image_ts_ = ts;
  pending_.push_back({next_image_++, ts});
}

void StreamingSynchronizer::push_cloud(double ts) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "push after finish()");
  if (!(ts >= 0.0) || (next_cloud_ > 0 && ts < last_cloud_ts_)) {
    throw Error(ErrorCode::UnorderedStream, "cloud timestamps regress at index " + std::to_string(next_cloud_));
  }
  last_cloud_ts_ = ts;
  clouds_.push_back({next_cloud_++, ts, false});
}

std::vector<SyncMatch> StreamingSynchronizer::poll() { return resolve(false); }

std::vector<SyncMatch> StreamingSynchronizer::finish() {
  finished_ = true;
  return resolve(true);
}

std::vector<SyncMatch> StreamingSynchronizer::resolve(bool final) {
  std::vector<SyncMatch> out;
  while (!pending_.empty()) {
    const PendingImage img = pending_.front();
    // Later clouds may still fall inside this image's window.
    if (!final && !(next_cloud_ > 0 && last_cloud_ts_ > img.ts + tolerance_)) break;

    CloudSlot* best = nullptr;
    double best_skew = 0.0;
    for (CloudSlot& c : clouds_) {
      if (c.ts > img.ts + tolerance_) break;
      const double skew = std::abs(c.ts - img.ts);
      if (c.used || c.ts < img.ts - tolerance_ || skew > tolerance_) continue;
      if (best == nullptr || skew < best_skew) {
        best = &c;
        best_skew = skew;
      }
    }
    if (best == nullptr) {
      ++dropped_;
    } else {
      best->used = true;
      out.push_back({img.index, best->index, best_skew});
    }
    pending_.pop_front();
  }

  // Future images start no earlier than the oldest pending (or last seen) one.
  const double horizon = (pending_.empty() ? last_image_ts_ : pending_.front().ts) - tolerance_;
  while (!clouds_.empty() && (clouds_.front().used || clouds_.front().ts < horizon)) {
    clouds_.pop_front();
  }
  return out;
}

}  // namespace liftguard
