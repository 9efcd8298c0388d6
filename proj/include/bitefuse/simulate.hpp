#pragma once

#include <cstdint>
#include <vector>

#include "bitefuse/types.hpp"

namespace bitefuse {

struct AnnotatorProfile {
  double jitter_sigma = 0.0;    // px of Gaussian noise per corner coordinate
  double miss_rate = 0.0;       // probability a ground-truth box is dropped
  double spurious_rate = 0.0;   // expected spurious boxes per image (Poisson)
  // row-stochastic over SimulationConfig::classes; empty = identity
  std::vector<std::vector<double>> label_confusion;

  void check(std::size_t n_classes) const;
};

struct SimulationConfig {
  int n_images = 100;
  double width = 1000.0;
  double height = 800.0;
  int lesions_min = 0;
  int lesions_max = 4;
  std::vector<CariesClass> classes = {CariesClass::EnamelCaries, CariesClass::DentineCaries,
                                      CariesClass::SecondaryLesion};
  std::vector<double> class_prior = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::vector<AnnotatorProfile> profiles;
  std::uint64_t seed = 0;
  // box geometry: per-axis extent range and enforced gap between GT boxes
  double box_min_extent = 20.0;
  double box_max_extent = 80.0;
  double min_separation = 12.0;
  double spurious_max_iou = 0.1;  // spurious boxes stay below this IoU vs GT

  void check() const;
};

// Ground-truth scene: per image, a uniform number of lesions in
// [lesions_min, lesions_max], pairwise-disjoint boxes (rejection sampled
// with a separation margin, <= 1000 attempts per box), labels from the
// class prior. source_id "gt". Deterministic per (config, seed); images
// generated independently from per-image derived seeds.
AnnotationSet generate_ground_truth(const SimulationConfig& config, int jobs = 0);
AnnotationSet generate_ground_truth_serial(const SimulationConfig& config);

// One annotator's noisy view: each GT box dropped with miss_rate, survivors
// get corner-wise Gaussian jitter (clipped to the image, reordered to keep
// min < max), labels pass through the confusion matrix, and
// Poisson(spurious_rate) far-from-GT boxes are added with uniform classes.
AnnotationSet render_annotator(const AnnotationSet& ground_truth,
                               const AnnotatorProfile& profile,
                               const SimulationConfig& config, int annotator_index,
                               int jobs = 0);
AnnotationSet render_annotator_serial(const AnnotationSet& ground_truth,
                                      const AnnotatorProfile& profile,
                                      const SimulationConfig& config, int annotator_index);

struct RecoveryReport {
  int gt_count = 0;
  int fused_count = 0;
  int matched = 0;
  double center_rmse = 0.0;     // px over matched pairs
  double edge_mae = 0.0;        // px over the four edges of matched pairs
  double label_accuracy = 0.0;  // matched pairs with equal labels
  double missed_fraction = 0.0;
  double spurious_fraction = 0.0;
};

// Greedy one-to-one matching of fused boxes to ground truth per image at
// IoU >= iou_threshold (best pairs first).
RecoveryReport score_fusion_against_truth(const AnnotationSet& fused,
                                          const AnnotationSet& ground_truth,
                                          double iou_threshold = 0.5);

}  // namespace bitefuse
