#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bitefuse/metrics.hpp"
#include "bitefuse/types.hpp"

namespace bitefuse {

struct BootstrapConfig {
  int iterations = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  int jobs = 0;

  void check() const;
};

struct BcaInterval {
  std::string statistic;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double z0 = 0.0;
  double acceleration = 0.0;
  double confidence = 0.95;
  bool degenerate = false;   // all replicates identical, or interval misses the point
  bool z0_clamped = false;   // all replicates on one side of the point
};

// Statistic over a multiset of unit indices (duplicates allowed). nullopt
// means the statistic is undefined on that resample.
using UnitStatistic = std::function<std::optional<double>(std::span<const int>)>;

// a = sum((mean-x_i)^3) / (6 * sum((mean-x_i)^2)^1.5); 0 when the
// denominator vanishes.
double jackknife_acceleration(std::span<const double> leave_one_out);

// Leave-one-out statistic values over n_units units (>= 2); undefined
// values are dropped.
std::vector<double> jackknife_values(int n_units, const UnitStatistic& stat, int jobs = 0);

// B replicates; replicate b draws n_units indices with replacement from a
// stream seeded by (seed, b). Undefined replicates are redrawn with a fresh
// derived seed, at most 10 attempts each. Parallel over replicates.
std::vector<double> bootstrap_replicates(int n_units, const UnitStatistic& stat,
                                         const BootstrapConfig& config);
// Sequential reference for the parallel path.
std::vector<double> bootstrap_replicates_serial(int n_units, const UnitStatistic& stat,
                                                const BootstrapConfig& config);

// BCa endpoints from already-computed replicates and jackknife values:
// z0 from the midrank fraction of replicates below the point estimate,
// adjusted percentile levels through the bias/acceleration transform,
// endpoints by linear interpolation between order statistics.
BcaInterval bca_from_samples(double point, std::vector<double> replicates,
                             std::span<const double> leave_one_out, double confidence);

// Full pipeline: point estimate, replicates, jackknife, BCa endpoints.
BcaInterval bca_interval(int n_units, const UnitStatistic& stat,
                         const BootstrapConfig& config);

enum class OverlapComparison { AHigher, BHigher, NotSignificant };

// Disjoint intervals: the one with the higher lower bound wins. Any overlap
// (including touching endpoints) is not significant.
OverlapComparison compare_by_overlap(const BcaInterval& a, const BcaInterval& b);

// --- evaluation statistics over annotation sets ---------------------------

struct MetricStatistic {
  enum class Metric { Map, Mf1, Mfnr, Ap, F1, Fnr };
  Metric metric = Metric::Map;
  std::optional<CariesClass> cls;  // set for per-class metrics
  std::vector<CariesClass> classes;
  double iou_threshold = 0.3;
  double confidence_threshold = 0.0;

  // "map" | "mf1" | "mfnr" | "ap:<class>" | "f1:<class>" | "fnr:<class>"
  static MetricStatistic parse(const std::string& name, std::vector<CariesClass> classes,
                               double iou_threshold, double confidence_threshold);
  std::string name() const;

  std::optional<double> extract(const EvaluationReport& report) const;
};

// Evaluates the statistic on the multiset of images named by image_ids
// (duplicates counted with multiplicity). Ids must exist in ground_truth.
std::optional<double> resample_statistic(const AnnotationSet& predictions,
                                         const AnnotationSet& ground_truth,
                                         std::span<const std::string> image_ids,
                                         const MetricStatistic& stat);

// Per-image-resampled BCa interval of an evaluation statistic.
BcaInterval bca_metric_interval(const AnnotationSet& predictions,
                                const AnnotationSet& ground_truth,
                                const MetricStatistic& stat, const BootstrapConfig& config);

}  // namespace bitefuse
