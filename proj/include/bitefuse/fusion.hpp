#pragma once

#include <map>
#include <string>
#include <vector>

#include "bitefuse/types.hpp"

namespace bitefuse {

enum class FusionStrategy { Gmm, Nms };

struct FusionConfig {
  double grouping_iou = 0.3;   // IoU for joining a group, in (0,1]
  double mass_p = 0.954500;    // central probability mass of the consensus interval
  double sigma_divisor = 4.0;  // sigma = box extent / divisor
  int min_votes = 1;           // groups with fewer distinct sources are dropped
  FusionStrategy strategy = FusionStrategy::Gmm;
  SeverityOrder severity = SeverityOrder::defaults();

  void check() const;  // throws ConfigError on out-of-range values
};

struct GaussianComponent {
  double mean = 0.0;
  double sigma = 1.0;  // > 0
};

// Equal-weight mixture along one axis.
struct AxisMixture {
  std::vector<GaussianComponent> components;

  double cdf(double x) const;
};

// mean = (lo+hi)/2, sigma = (hi-lo)/sigma_divisor. Requires lo < hi.
GaussianComponent fit_axis_gaussian(double lo, double hi, double sigma_divisor);

// Unique x with mixture CDF(x) = q, by bisection on
// [min(mean_i - 10 sigma_i), max(mean_i + 10 sigma_i)] to 1e-9 px.
double mixture_quantile(const AxisMixture& mix, double q);

// Canonical deterministic ordering: area descending, then
// (x_min, y_min, x_max, y_max), then source_id, then label.
bool canonical_less(const Annotation& a, const Annotation& b);

// Greedy agglomeration in canonical order. Each annotation joins the first
// group whose running mean box reaches grouping_iou with it; a group holds
// at most one box per source (the one with higher IoU against the running
// mean wins, the displaced box seeds a new group at the end of the list).
// All input annotations must share one image_id.
std::vector<std::vector<Annotation>> group_boxes(const std::vector<Annotation>& annotations,
                                                 const FusionConfig& config);

struct FusedBox {
  BoundingBox box;
  AxisMixture x_mixture;
  AxisMixture y_mixture;
};

// Per axis: one Gaussian per member, consensus interval
// [quantile((1-p)/2), quantile((1+p)/2)] of the equal-weight mixture.
FusedBox fuse_group(const std::vector<Annotation>& members, const FusionConfig& config);

struct VoteResult {
  CariesClass label = CariesClass::Grade1;
  std::map<CariesClass, int> tally;
  int support = 0;       // distinct sources in the group
  bool dropped = false;  // support < min_votes
};

// Plurality label; ties go to the most severe class.
VoteResult vote_label(const std::vector<Annotation>& members, const SeverityOrder& severity,
                      int min_votes);

// Non-maximum suppression with all confidences equal: repeatedly keeps the
// canonically-first remaining box and suppresses members with IoU >=
// iou_threshold against it. Baseline for comparison with the mixture fusion;
// output is biased to the first reference box by construction.
std::vector<BoundingBox> nms_fuse(const std::vector<Annotation>& members,
                                  double iou_threshold);

struct GroupDiagnostics {
  std::string image_id;
  std::vector<Annotation> members;
  std::map<CariesClass, int> tally;
  CariesClass label = CariesClass::Grade1;
  int support = 0;
  bool dropped = false;
  std::vector<BoundingBox> boxes;  // one for Gmm; NMS survivors otherwise
};

struct FusionOutput {
  AnnotationSet consensus;
  std::vector<GroupDiagnostics> groups;
};

// Whole-set fusion: per image, group -> fuse -> vote. Consensus annotations
// carry source_id "consensus" and confidence = support / number of sources
// that annotated the image. Boxes are clamped to image bounds. Images are
// processed independently; `jobs` selects the OpenMP worker count (0 = all
// cores, 1 = serial path).
FusionOutput fuse_annotation_set(const AnnotationSet& set, const FusionConfig& config,
                                 int jobs = 0);

// Plain sequential loop over images, kept as the reference the parallel
// path is tested against.
FusionOutput fuse_annotation_set_serial(const AnnotationSet& set,
                                        const FusionConfig& config);

}  // namespace bitefuse
