#pragma once

#include <map>
#include <span>
#include <vector>

#include "liftguard/detection.hpp"

namespace liftguard {

struct ScoredFlag {
  double confidence = 0.0;
  bool true_positive = false;
};

struct ClassMatches {
  std::vector<ScoredFlag> flags;  // descending confidence, ties in input order
  std::size_t gt_count = 0;

  std::size_t tp() const;
  std::size_t fp() const { return flags.size() - tp(); }
  std::size_t fn() const { return gt_count - tp(); }
};

struct MatchResult {
  std::map<ClassLabel, ClassMatches> per_class;

  // Appends another image's matches and restores confidence order
  // (stable, so earlier images win ties).
  void merge(const MatchResult& other);
};

// Greedy, class-aware, one detection per ground truth. Detections are visited
// in descending confidence (stable); each takes its best-IoU unmatched GT of
// the same class and is a TP iff that IoU >= iou_thresh.
MatchResult match_detections(std::span<const Detection> dets, std::span<const Detection> gts,
                             double iou_thresh);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Zero denominators give 0.
std::map<ClassLabel, PrecisionRecall> precision_recall(const MatchResult& m);
PrecisionRecall precision_recall(const ClassMatches& m);

// All-point interpolated area under the precision envelope. `tp_sequence`
// must already be in descending-confidence order. Throws ZeroGroundTruth.
double average_precision(std::span<const bool> tp_sequence, std::size_t gt_count);
double average_precision(const ClassMatches& m);

// Arithmetic mean over the supplied classes. Throws NoClasses when empty.
double mean_ap(const std::map<ClassLabel, double>& per_class_ap);

// 0.50, 0.55, ..., 0.95
std::vector<double> coco_iou_thresholds();

struct FrameDetections {
  std::vector<Detection> detections;
  std::vector<Detection> ground_truth;
};

struct ClassReport {
  double precision = 0.0;
  double recall = 0.0;
  double ap50 = 0.0;
  double ap_range = 0.0;  // AP averaged over the requested IoU thresholds
};

struct EvaluationReport {
  std::map<ClassLabel, ClassReport> per_class;  // classes present in ground truth
  ClassReport mean;                             // macro average
  std::vector<double> iou_thresholds;
};

// Precision and recall are taken at IoU 0.5 over all detections. Classes with
// no ground truth anywhere are excluded from every mean.
EvaluationReport evaluate_detections(std::span<const FrameDetections> frames,
                                     std::span<const double> iou_thresholds);

}  // namespace liftguard
