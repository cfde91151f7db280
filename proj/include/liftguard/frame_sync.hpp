#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "liftguard/detection.hpp"
#include "liftguard/pointcloud.hpp"

namespace liftguard {

inline constexpr double kDefaultSyncTolerance = 0.06;  // s, just over half a 10 Hz LiDAR period

struct SyncMatch {
  std::size_t image_index = 0;
  std::size_t cloud_index = 0;
  double skew = 0.0;

  friend bool operator==(const SyncMatch&, const SyncMatch&) = default;
};

struct SyncResult {
  std::vector<SyncMatch> matches;  // ordered by image index
  std::size_t dropped = 0;         // image frames with no usable cloud
};

// Image-driven greedy pairing. Each image, in order, takes the nearest unused
// cloud within `tolerance` (ties go to the earlier cloud); images without a
// candidate are dropped. Throws UnorderedStream if either sequence regresses
// and InvalidArgument for tolerance <= 0.
SyncResult match_timestamps(std::span<const double> image_ts, std::span<const double> cloud_ts,
                            double tolerance);

struct ImageFrame {
  double timestamp = 0.0;
  std::vector<Detection> detections;
};

struct FramePair {
  std::vector<Detection> detections;
  PointCloud cloud;
  double image_ts = 0.0;
  double cloud_ts = 0.0;
  double skew = 0.0;
};

struct PairedStreams {
  std::vector<FramePair> pairs;
  std::size_t dropped = 0;
};

PairedStreams pair_streams(std::span<const ImageFrame> images, std::span<const PointCloud> clouds,
                           double tolerance);

// Incremental form of match_timestamps. Timestamps arrive in order on each
// stream; an image is resolved once a cloud later than image_ts + tolerance
// has been seen (or on finish()). Emits exactly what the batch form would.
class StreamingSynchronizer {
 public:
  explicit StreamingSynchronizer(double tolerance);

  void push_image(double ts);
  void push_cloud(double ts);

  // Matches that became final since the last call.
  std::vector<SyncMatch> poll();
  // Resolves every pending image; no further pushes are accepted.
  std::vector<SyncMatch> finish();

  std::size_t dropped() const { return dropped_; }
  std::size_t buffered_clouds() const { return clouds_.size(); }

 private:
  struct CloudSlot {
    std::size_t index;
    double ts;
    bool used;
  };
  struct PendingImage {
    std::size_t index;
    double ts;
  };

  std::vector<SyncMatch> resolve(bool final);

  double tolerance_;
  std::deque<PendingImage> pending_;
  std::deque<CloudSlot> clouds_;
  std::size_t next_image_ = 0;
  std::size_t next_cloud_ = 0;
  double last_image_ts_ = 0.0;
  double last_cloud_ts_ = 0.0;
  std::size_t dropped_ = 0;
  bool finished_ = false;
};

}  // namespace liftguard
