#include "bitefuse/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "bitefuse/errors.hpp"
#include "bitefuse/parallel.hpp"
#include "bitefuse/rng.hpp"
#include "bitefuse/stats.hpp"

namespace bitefuse {

void BootstrapConfig::check() const {
  if (iterations < 1) throw ConfigError("bootstrap: iterations must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("bootstrap: confidence must be in (0,1)");
  }
}

double jackknife_acceleration(std::span<const double> leave_one_out) {
  if (leave_one_out.size() < 2) return 0.0;
  const double m = mean(leave_one_out);
  double s2 = 0.0, s3 = 0.0;
  for (double x : leave_one_out) {
    const double d = m - x;
    s2 += d * d;
    s3 += d * d * d;
  }
  const double denom = 6.0 * std::pow(s2, 1.5);
  return denom > 0.0 ? s3 / denom : 0.0;
}

std::vector<double> jackknife_values(int n_units, const UnitStatistic& stat, int jobs) {
  if (n_units < 2) throw ValidationError("jackknife: need at least 2 units");
  std::vector<std::optional<double>> loo(n_units);
  parallel_for(n_units, jobs, [&](int i) {
    std::vector<int> idx;
    idx.reserve(n_units - 1);
    for (int j = 0; j < n_units; ++j) {
      if (j != i) idx.push_back(j);
    }
    loo[i] = stat(idx);
  });
  std::vector<double> out;
  out.reserve(n_units);
  for (const auto& v : loo) {
    if (v) out.push_back(*v);
  }
  return out;
}

namespace {

double one_replicate(int n_units, const UnitStatistic& stat, std::uint64_t seed, int b) {
  std::vector<int> idx(n_units);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b),
                        static_cast<std::uint64_t>(attempt)));
    for (int& v : idx) {
      v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_units)));
    }
    if (const auto v = stat(idx)) return *v;
  }
  throw ValidationError("bootstrap: statistic undefined after 10 redraws of replicate " +
                        std::to_string(b));
}

}  // namespace

std::vector<double> bootstrap_replicates(int n_units, const UnitStatistic& stat,
                                         const BootstrapConfig& config) {
  config.check();
  if (n_units < 1) throw ValidationError("bootstrap: empty unit set");
  std::vector<double> replicates(config.iterations);
  parallel_for(config.iterations, config.jobs, [&](int b) {
    replicates[b] = one_replicate(n_units, stat, config.seed, b);
  });
  return replicates;
}

std::vector<double> bootstrap_replicates_serial(int n_units, const UnitStatistic& stat,
                                                const BootstrapConfig& config) {
  config.check();
  if (n_units < 1) throw ValidationError("bootstrap: empty unit set");
  std::vector<double> replicates(config.iterations);
  for (int b = 0; b < config.iterations; ++b) {
    replicates[b] = one_replicate(n_units, stat, config.seed, b);
  }
  return replicates;
}

BcaInterval bca_from_samples(double point, std::vector<double> replicates,
                             std::span<const double> leave_one_out, double confidence) {
  if (replicates.empty()) throw ValidationError("bca: no replicates");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("bca: confidence must be in (0,1)");
  }

  BcaInterval ci;
  ci.point = point;
  ci.confidence = confidence;
  ci.acceleration = jackknife_acceleration(leave_one_out);

  std::sort(replicates.begin(), replicates.end());
  if (replicates.front() == replicates.back()) {
    ci.lower = ci.upper = point;
    ci.degenerate = true;
    ci.z0 = 0.0;
    return ci;
  }

  // midrank fraction below the point estimate
  std::size_t less = 0, equal = 0;
  for (double r : replicates) {
    if (r < point) {
      ++less;
    } else if (r == point) {
      ++equal;
    }
  }
  const double frac =
      (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) / replicates.size();
  if (frac <= 0.0) {
    ci.z0 = -4.0;
    ci.z0_clamped = true;
  } else if (frac >= 1.0) {
    ci.z0 = 4.0;
    ci.z0_clamped = true;
  } else {
    ci.z0 = normal_quantile(frac);
    if (std::abs(ci.z0) > 4.0) {
      ci.z0 = std::copysign(4.0, ci.z0);
      ci.z0_clamped = true;
    }
  }

  const double alpha = 1.0 - confidence;
  auto adjusted_level = [&](double z_alpha) {
    const double t = ci.z0 + z_alpha;
    const double denom = 1.0 - ci.acceleration * t;
    if (denom <= 0.0) return t > 0.0 ? 1.0 : 0.0;
    return normal_cdf(ci.z0 + t / denom);
  };
  const double a1 = adjusted_level(normal_quantile(alpha / 2.0));
  const double a2 = adjusted_level(normal_quantile(1.0 - alpha / 2.0));

  ci.lower = interp_quantile(replicates, a1);
  ci.upper = interp_quantile(replicates, a2);
  if (point < ci.lower || point > ci.upper) ci.degenerate = true;
  return ci;
}

BcaInterval bca_interval(int n_units, const UnitStatistic& stat,
                         const BootstrapConfig& config) {
  config.check();
  if (n_units < 1) throw ValidationError("bca: empty unit set");

  std::vector<int> identity(n_units);
  for (int i = 0; i < n_units; ++i) identity[i] = i;
  const auto point = stat(identity);
  if (!point) throw ValidationError("bca: statistic undefined on the full unit set");

  std::vector<double> replicates = bootstrap_replicates(n_units, stat, config);
  std::vector<double> loo =
      n_units >= 2 ? jackknife_values(n_units, stat, config.jobs) : std::vector<double>{};
  return bca_from_samples(*point, std::move(replicates), loo, config.confidence);
}

OverlapComparison compare_by_overlap(const BcaInterval& a, const BcaInterval& b) {
  if (!a.statistic.empty() && !b.statistic.empty() && a.statistic != b.statistic) {
    throw ValidationError("compare_by_overlap: mismatched statistics \"" + a.statistic +
                          "\" vs \"" + b.statistic + "\"");
  }
  if (a.confidence != b.confidence) {
    throw ValidationError("compare_by_overlap: mismatched confidence levels");
  }
  if (a.lower > b.upper) return OverlapComparison::AHigher;
  if (b.lower > a.upper) return OverlapComparison::BHigher;
  return OverlapComparison::NotSignificant;
}

// --- evaluation statistics -------------------------------------------------

MetricStatistic MetricStatistic::parse(const std::string& name,
                                       std::vector<CariesClass> classes,
                                       double iou_threshold, double confidence_threshold) {
  MetricStatistic s;
  s.classes = std::move(classes);
  s.iou_threshold = iou_threshold;
  s.confidence_threshold = confidence_threshold;

  std::string head = name;
  std::string cls_name;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    head = name.substr(0, colon);
    cls_name = name.substr(colon + 1);
  }
  if (head == "map") {
    s.metric = Metric::Map;
  } else if (head == "mf1") {
    s.metric = Metric::Mf1;
  } else if (head == "mfnr") {
    s.metric = Metric::Mfnr;
  } else if (head == "ap") {
    s.metric = Metric::Ap;
  } else if (head == "f1") {
    s.metric = Metric::F1;
  } else if (head == "fnr") {
    s.metric = Metric::Fnr;
  } else {
    throw ConfigError("unknown statistic \"" + name + "\"");
  }

  const bool per_class = s.metric == Metric::Ap || s.metric == Metric::F1 ||
                         s.metric == Metric::Fnr;
  if (per_class != !cls_name.empty()) {
    throw ConfigError("statistic \"" + name + "\" " +
                      (per_class ? "requires" : "does not take") + " a :<class> suffix");
  }
  if (per_class) {
    s.cls = caries_class_from_string(cls_name);
    if (std::find(s.classes.begin(), s.classes.end(), *s.cls) == s.classes.end()) {
      throw ConfigError("statistic class \"" + cls_name + "\" not in evaluated classes");
    }
  }
  return s;
}

std::string MetricStatistic::name() const {
  switch (metric) {
    case Metric::Map: return "map";
    case Metric::Mf1: return "mf1";
    case Metric::Mfnr: return "mfnr";
    case Metric::Ap: return "ap:" + std::string(to_string(*cls));
    case Metric::F1: return "f1:" + std::string(to_string(*cls));
    case Metric::Fnr: return "fnr:" + std::string(to_string(*cls));
  }
  return "?";
}

std::optional<double> MetricStatistic::extract(const EvaluationReport& report) const {
  bool any_included = false;
  for (const ClassMetrics& m : report.per_class) {
    any_included = any_included || !m.excluded;
  }
  switch (metric) {
    case Metric::Map:
      return any_included ? std::optional(report.map) : std::nullopt;
    case Metric::Mf1:
      return any_included ? std::optional(report.mf1) : std::nullopt;
    case Metric::Mfnr:
      return any_included ? std::optional(report.mfnr) : std::nullopt;
    default:
      break;
  }
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    if (report.classes[i] != *cls) continue;
    const ClassMetrics& m = report.per_class[i];
    if (m.excluded) return std::nullopt;
    switch (metric) {
      case Metric::Ap: return m.ap;
      case Metric::F1: return m.f1;
      case Metric::Fnr: return m.fnr;
      default: break;
    }
  }
  return std::nullopt;
}

std::optional<double> resample_statistic(const AnnotationSet& predictions,
                                         const AnnotationSet& ground_truth,
                                         std::span<const std::string> image_ids,
                                         const MetricStatistic& stat) {
  std::unordered_map<std::string, const ImageInfo*> gt_images;
  for (const ImageInfo& im : ground_truth.images) gt_images.emplace(im.id, &im);
  std::unordered_map<std::string, std::vector<const Annotation*>> gt_by_image;
  for (const Annotation& a : ground_truth.annotations) {
    gt_by_image[a.image_id].push_back(&a);
  }
  std::unordered_map<std::string, std::vector<const Annotation*>> pred_by_image;
  for (const Annotation& a : predictions.annotations) {
    pred_by_image[a.image_id].push_back(&a);
  }

  AnnotationSet gt_r, pred_r;
  gt_r.label_space = ground_truth.label_space;
  pred_r.label_space = predictions.label_space;

  // each occurrence becomes a distinct synthetic image so duplicated images
  // count with multiplicity
  int occurrence = 0;
  for (const std::string& id : image_ids) {
    const auto it = gt_images.find(id);
    if (it == gt_images.end()) {
      throw ValidationError("resample: unknown image id \"" + id + "\"");
    }
    const std::string new_id = id + "#" + std::to_string(occurrence++);
    ImageInfo im = *it->second;
    im.id = new_id;
    gt_r.images.push_back(im);
    pred_r.images.push_back(std::move(im));
    if (const auto g = gt_by_image.find(id); g != gt_by_image.end()) {
      for (const Annotation* a : g->second) {
        Annotation copy = *a;
        copy.image_id = new_id;
        gt_r.annotations.push_back(std::move(copy));
      }
    }
    if (const auto p = pred_by_image.find(id); p != pred_by_image.end()) {
      for (const Annotation* a : p->second) {
        Annotation copy = *a;
        copy.image_id = new_id;
        pred_r.annotations.push_back(std::move(copy));
      }
    }
  }

  const EvaluationReport report = evaluate(pred_r, gt_r, stat.classes,
                                           stat.iou_threshold, stat.confidence_threshold);
  return stat.extract(report);
}

BcaInterval bca_metric_interval(const AnnotationSet& predictions,
                                const AnnotationSet& ground_truth,
                                const MetricStatistic& stat, const BootstrapConfig& config) {
  if (ground_truth.images.empty()) {
    throw ValidationError("bca: ground-truth set has no images");
  }
  const int n = static_cast<int>(ground_truth.images.size());
  const UnitStatistic unit_stat = [&](std::span<const int> idx) {
    std::vector<std::string> ids;
    ids.reserve(idx.size());
    for (int i : idx) ids.push_back(ground_truth.images[i].id);
    return resample_statistic(predictions, ground_truth, ids, stat);
  };
  BcaInterval ci = bca_interval(n, unit_stat, config);
  ci.statistic = stat.name();
  return ci;
}

}  // namespace bitefuse
