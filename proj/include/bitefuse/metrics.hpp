#pragma once

#include <string>
#include <vector>

#include "bitefuse/types.hpp"

namespace bitefuse {

// One prediction after matching, in processing order (confidence descending,
// ties by image_id then box). matched_gt indexes the per-class ground-truth
// list, -1 for false positives.
struct PredictionRecord {
  std::string image_id;
  double confidence = 0.0;
  BoundingBox box;
  bool is_tp = false;
  int matched_gt = -1;
};

struct MatchOutcome {
  std::vector<PredictionRecord> predictions;
  int gt_count = 0;
  int tp_count = 0;
  int fp_count = 0;
  int fn_count = 0;  // gt_count - tp_count
};

// Greedy PASCAL matching for one class: predictions in confidence order,
// each takes the unmatched ground-truth box of the same image with highest
// IoU when that IoU >= iou_threshold.
MatchOutcome match_detections(const AnnotationSet& predictions,
                              const AnnotationSet& ground_truth, CariesClass cls,
                              double iou_threshold);

// All-points interpolated average precision. 0 (and excluded upstream) when
// the class has no ground truth.
double average_precision(const MatchOutcome& outcome);

struct OperatingPoint {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fnr = 0.0;
  bool fnr_undefined = false;  // gt_count == 0; fnr reported as 0
};

// Tallies at a confidence cutoff (predictions with confidence >= threshold).
// Greedy matching of a confidence-ranked prefix never depends on the
// discarded suffix, so this is a prefix sum over `outcome`.
OperatingPoint f1_fnr(const MatchOutcome& outcome, double confidence_threshold);

struct ClassMetrics {
  double ap = 0.0;
  double f1 = 0.0;
  double fnr = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int gt_count = 0;
  bool excluded = false;  // no ground truth; left out of macro means
};

struct EvaluationReport {
  double iou_threshold = 0.3;
  double confidence_threshold = 0.0;
  std::vector<CariesClass> classes;
  std::vector<ClassMetrics> per_class;  // parallel to classes
  double map = 0.0;
  double mf1 = 0.0;
  double mfnr = 0.0;
};

// Per-class metrics plus unweighted macro means over classes with ground
// truth. Both sets must share a label space and every prediction must
// reference a ground-truth image.
EvaluationReport evaluate(const AnnotationSet& predictions, const AnnotationSet& ground_truth,
                          const std::vector<CariesClass>& classes, double iou_threshold = 0.3,
                          double confidence_threshold = 0.0);

struct AggregateCell {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation, n-1
};

struct FoldSummary {
  int n_folds = 0;
  std::vector<CariesClass> classes;
  struct PerClass {
    AggregateCell ap, f1, fnr;
  };
  std::vector<PerClass> per_class;
  AggregateCell map, mf1, mfnr;
};

// Mean and sample std of every metric across >= 2 reports with identical
// class lists.
FoldSummary aggregate_folds(const std::vector<EvaluationReport>& reports);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text, const std::string& context);

}  // namespace bitefuse
