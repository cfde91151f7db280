#include "liftguard/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "liftguard/error.hpp"

namespace liftguard {

std::size_t ClassMatches::tp() const {
  return static_cast<std::size_t>(
      std::count_if(flags.begin(), flags.end(), [](const ScoredFlag& f) { return f.true_positive; }));
}

void MatchResult::merge(const MatchResult& other) {
  for (const auto& [label, m] : other.per_class) {
    ClassMatches& dst = per_class[label];
    dst.flags.insert(dst.flags.end(), m.flags.begin(), m.flags.end());
    dst.gt_count += m.gt_count;
    std::stable_sort(dst.flags.begin(), dst.flags.end(),
                     [](const ScoredFlag& a, const ScoredFlag& b) { return a.confidence > b.confidence; });
  }
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const Detection> gts,
                             double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "iou threshold must lie in (0, 1]");
  }
  MatchResult result;
  for (const Detection& g : gts) ++result.per_class[g.label].gt_count;

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t di : order) {
    const Detection& d = dets[di];
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi] || gts[gi].label != d.label) continue;
      const double o = iou(d.bbox, gts[gi].bbox);
      if (o > best) {
        best = o;
        best_gt = gi;
      }
    }
    const bool tp = best_gt < gts.size() && best >= iou_thresh;
    if (tp) gt_taken[best_gt] = true;
    result.per_class[d.label].flags.push_back({d.confidence, tp});
  }
  return result;
}

PrecisionRecall precision_recall(const ClassMatches& m) {
  const double tp = static_cast<double>(m.tp());
  const double fp = static_cast<double>(m.fp());
  const double fn = static_cast<double>(m.fn());
  return {tp + fp > 0.0 ? tp / (tp + fp) : 0.0, tp + fn > 0.0 ? tp / (tp + fn) : 0.0};
}

std::map<ClassLabel, PrecisionRecall> precision_recall(const MatchResult& m) {
  std::map<ClassLabel, PrecisionRecall> out;
  for (const auto& [label, cm] : m.per_class) out[label] = precision_recall(cm);
  return out;
}

double average_precision(std::span<const bool> tp_sequence, std::size_t gt_count) {
  if (gt_count == 0) throw Error(ErrorCode::ZeroGroundTruth, "AP needs at least one ground truth");
  const std::size_t n = tp_sequence.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tp_sequence[i]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // precision envelope: best precision at any recall >= this one
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

double average_precision(const ClassMatches& m) {
  const std::size_t n = m.flags.size();
  auto seq = std::make_unique<bool[]>(n);  // std::vector<bool> cannot back a span
  for (std::size_t i = 0; i < n; ++i) seq[i] = m.flags[i].true_positive;
  return average_precision(std::span<const bool>(seq.get(), n), m.gt_count);
}

double mean_ap(const std::map<ClassLabel, double>& per_class_ap) {
  if (per_class_ap.empty()) throw Error(ErrorCode::NoClasses, "mean AP over zero classes");
  double sum = 0.0;
  for (const auto& [label, ap] : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50.0 + 5.0 * i) / 100.0);
  return t;
}

EvaluationReport evaluate_detections(std::span<const FrameDetections> frames,
                                     std::span<const double> iou_thresholds) {
  if (iou_thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "no IoU thresholds given");
  EvaluationReport report;
  report.iou_thresholds.assign(iou_thresholds.begin(), iou_thresholds.end());

  auto match_all = [&](double thresh) {
    MatchResult total;
    for (const FrameDetections& f : frames) total.merge(match_detections(f.detections, f.ground_truth, thresh));
    return total;
  };

  const MatchResult at50 = match_all(0.5);
  std::map<ClassLabel, std::vector<double>> range_aps;
  for (double t : iou_thresholds) {
    const MatchResult m = match_all(t);
    for (const auto& [label, cm] : m.per_class) {
      if (cm.gt_count > 0) range_aps[label].push_back(average_precision(cm));
    }
  }

  std::map<ClassLabel, double> ap50s, ap_ranges;
  for (const auto& [label, cm] : at50.per_class) {
    if (cm.gt_count == 0) continue;
    ClassReport r;
    const PrecisionRecall pr = precision_recall(cm);
    r.precision = pr.precision;
    r.recall = pr.recall;
    r.ap50 = average_precision(cm);
    const auto& aps = range_aps[label];
    r.ap_range = std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
    report.per_class[label] = r;
    ap50s[label] = r.ap50;
    ap_ranges[label] = r.ap_range;
  }
  if (report.per_class.empty()) throw Error(ErrorCode::NoClasses, "ground truth contains no objects");

  const double n = static_cast<double>(report.per_class.size());
  for (const auto& [label, r] : report.per_class) {
    report.mean.precision += r.precision / n;
    report.mean.recall += r.recall / n;
  }
  report.mean.ap50 = mean_ap(ap50s);
  report.mean.ap_range = mean_ap(ap_ranges);
  return report;
}

}  // namespace liftguard
