#include "liftguard/detection.hpp"

#include <algorithm>
#include <cmath>

#include "liftguard/error.hpp"
#include "liftguard/io.hpp"

namespace liftguard {

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Hook: return "hook";
    case ClassLabel::MiC: return "mic";
    case ClassLabel::MiCFrame: return "mic_frame";
    case ClassLabel::Human: return "human";
  }
  return "unknown";
}

ClassLabel parse_label(std::string_view text) {
  for (ClassLabel l : kAllLabels) {
    if (to_string(l) == text) return l;
  }
  throw Error(ErrorCode::ParseError, "unknown class '" + std::string(text) + "'");
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
  const double h = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BBox clamp_to_image(const BBox& box, int width, int height) {
  const double w = width, h = height;
  return {std::clamp(box.u_min, 0.0, w), std::clamp(box.v_min, 0.0, h),
          std::clamp(box.u_max, 0.0, w), std::clamp(box.v_max, 0.0, h)};
}

void validate(const Detection& d) {
  if (!std::isfinite(d.bbox.u_min) || !std::isfinite(d.bbox.u_max) ||
      !std::isfinite(d.bbox.v_min) || !std::isfinite(d.bbox.v_max) || !d.bbox.valid()) {
    throw Error(ErrorCode::InvalidArgument, "bbox must satisfy u_min < u_max and v_min < v_max");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence outside [0, 1]");
  }
}

void FileDetector::add_frame(double frame_ts, std::filesystem::path detections_file) {
  frames_[frame_ts] = std::move(detections_file);
}

std::vector<Detection> FileDetector::detect(const std::string& image_ref, double frame_ts) const {
  const auto it = frames_.find(frame_ts);
  if (it == frames_.end()) {
    throw Error(ErrorCode::MissingFrame, "no recorded detections for frame " + image_ref + " at t=" +
                                             std::to_string(frame_ts));
  }
  return load_detections(it->second);
}

}  // namespace liftguard
