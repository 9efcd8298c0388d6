#include "bitefuse/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "bitefuse/annotations.hpp"
#include "bitefuse/errors.hpp"
#include "bitefuse/parallel.hpp"
#include "bitefuse/rng.hpp"

namespace bitefuse {

void AnnotatorProfile::check(std::size_t n_classes) const {
  if (!(jitter_sigma >= 0.0)) throw ConfigError("profile: jitter_sigma must be >= 0");
  if (!(miss_rate >= 0.0 && miss_rate < 1.0)) {
    throw ConfigError("profile: miss_rate must be in [0,1)");
  }
  if (!(spurious_rate >= 0.0)) throw ConfigError("profile: spurious_rate must be >= 0");
  if (!label_confusion.empty()) {
    if (label_confusion.size() != n_classes) {
      throw ConfigError("profile: confusion matrix must have one row per class");
    }
    for (const auto& row : label_confusion) {
      if (row.size() != n_classes) {
        throw ConfigError("profile: confusion matrix rows must match class count");
      }
      double s = 0.0;
      for (double p : row) {
        if (p < 0.0) throw ConfigError("profile: negative confusion probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-9) {
        throw ConfigError("profile: confusion rows must sum to 1");
      }
    }
  }
}

void SimulationConfig::check() const {
  if (n_images < 0) throw ConfigError("simulate: n_images must be >= 0");
  if (!(width > 0.0 && height > 0.0)) throw ConfigError("simulate: empty image");
  if (lesions_min < 0 || lesions_max < lesions_min) {
    throw ConfigError("simulate: bad lesion count range");
  }
  if (classes.empty() || classes.size() != class_prior.size()) {
    throw ConfigError("simulate: class prior must match class list");
  }
  double s = 0.0;
  for (double p : class_prior) {
    if (p < 0.0) throw ConfigError("simulate: negative class prior");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("simulate: class prior must sum to 1");
  if (!(box_min_extent > 0.0 && box_max_extent >= box_min_extent)) {
    throw ConfigError("simulate: bad box extent range");
  }
  if (box_max_extent > width || box_max_extent > height) {
    throw ConfigError("simulate: boxes larger than the image");
  }
  if (!(min_separation >= 0.0)) throw ConfigError("simulate: min_separation must be >= 0");
  if (!(spurious_max_iou >= 0.0 && spurious_max_iou < 1.0)) {
    throw ConfigError("simulate: spurious_max_iou must be in [0,1)");
  }
  for (const AnnotatorProfile& p : profiles) p.check(classes.size());
}

namespace {

std::string image_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%06d", i);
  return buf;
}

bool separated(const BoundingBox& a, const BoundingBox& b, double gap) {
  const double half = gap / 2.0;
  const BoundingBox ga{a.x_min - half, a.y_min - half, a.x_max + half, a.y_max + half};
  const BoundingBox gb{b.x_min - half, b.y_min - half, b.x_max + half, b.y_max + half};
  return ga.x_max <= gb.x_min || gb.x_max <= ga.x_min || ga.y_max <= gb.y_min ||
         gb.y_max <= ga.y_min;
}

BoundingBox random_box(Rng& rng, const SimulationConfig& cfg) {
  const double w = rng.uniform(cfg.box_min_extent, cfg.box_max_extent);
  const double h = rng.uniform(cfg.box_min_extent, cfg.box_max_extent);
  const double x = rng.uniform(0.0, cfg.width - w);
  const double y = rng.uniform(0.0, cfg.height - h);
  return {x, y, x + w, y + h};
}

std::size_t categorical(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

std::vector<Annotation> simulate_image_gt(const SimulationConfig& cfg, int image_index) {
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(image_index)));
  const std::string id = image_name(image_index);
  const int count = rng.uniform_int(cfg.lesions_min, cfg.lesions_max);

  std::vector<Annotation> out;
  for (int b = 0; b < count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const BoundingBox candidate = random_box(rng, cfg);
      placed = true;
      for (const Annotation& prev : out) {
        if (!separated(candidate, prev.box, cfg.min_separation)) {
          placed = false;
          break;
        }
      }
      if (placed) {
        Annotation a;
        a.image_id = id;
        a.source_id = "gt";
        a.label = cfg.classes[categorical(rng, cfg.class_prior)];
        a.box = candidate;
        out.push_back(std::move(a));
      }
    }
    if (!placed) {
      throw ValidationError("simulate: cannot place " + std::to_string(count) +
                            " separated boxes on image " + id);
    }
  }
  return out;
}

// clip to the image, restore min < max, and repair the measure-zero case
// where clipping collapsed an edge
void repair_box(BoundingBox& box, double width, double height) {
  if (box.x_min > box.x_max) std::swap(box.x_min, box.x_max);
  if (box.y_min > box.y_max) std::swap(box.y_min, box.y_max);
  box.x_min = std::clamp(box.x_min, 0.0, width);
  box.x_max = std::clamp(box.x_max, 0.0, width);
  box.y_min = std::clamp(box.y_min, 0.0, height);
  box.y_max = std::clamp(box.y_max, 0.0, height);
  if (box.x_max - box.x_min < 1e-6) {
    box.x_min = std::max(0.0, box.x_max - 0.5);
    if (box.x_max - box.x_min < 1e-6) box.x_max = std::min(width, box.x_min + 0.5);
  }
  if (box.y_max - box.y_min < 1e-6) {
    box.y_min = std::max(0.0, box.y_max - 0.5);
    if (box.y_max - box.y_min < 1e-6) box.y_max = std::min(height, box.y_min + 0.5);
  }
}

std::vector<Annotation> simulate_image_view(const SimulationConfig& cfg,
                                            const AnnotatorProfile& profile,
                                            int annotator_index, int image_index,
                                            const std::vector<const Annotation*>& gt,
                                            const std::string& source) {
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(image_index),
                      static_cast<std::uint64_t>(annotator_index) + 1));
  const std::string id = image_name(image_index);
  std::unordered_map<CariesClass, std::size_t> class_index;
  for (std::size_t i = 0; i < cfg.classes.size(); ++i) class_index[cfg.classes[i]] = i;

  std::vector<Annotation> out;
  for (const Annotation* g : gt) {
    if (profile.miss_rate > 0.0 && rng.bernoulli(profile.miss_rate)) continue;
    Annotation a;
    a.image_id = id;
    a.source_id = source;
    a.box = g->box;
    if (profile.jitter_sigma > 0.0) {
      a.box.x_min += rng.normal(0.0, profile.jitter_sigma);
      a.box.y_min += rng.normal(0.0, profile.jitter_sigma);
      a.box.x_max += rng.normal(0.0, profile.jitter_sigma);
      a.box.y_max += rng.normal(0.0, profile.jitter_sigma);
      repair_box(a.box, cfg.width, cfg.height);
    }
    a.label = g->label;
    if (!profile.label_confusion.empty()) {
      const std::size_t row = class_index.at(g->label);
      a.label = cfg.classes[categorical(rng, profile.label_confusion[row])];
    }
    out.push_back(std::move(a));
  }

  const int n_spurious = rng.poisson(profile.spurious_rate);
  const std::vector<double> uniform(cfg.classes.size(), 1.0 / cfg.classes.size());
  for (int sp = 0; sp < n_spurious; ++sp) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const BoundingBox candidate = random_box(rng, cfg);
      bool clear = true;
      for (const Annotation* g : gt) {
        if (iou(candidate, g->box) > cfg.spurious_max_iou) {
          clear = false;
          break;
        }
      }
      if (clear) {
        Annotation a;
        a.image_id = id;
        a.source_id = source;
        a.label = cfg.classes[categorical(rng, uniform)];
        a.box = candidate;
        out.push_back(std::move(a));
        break;
      }
    }
    // a spurious box that cannot be placed is silently skipped
  }
  return out;
}

AnnotationSet assemble_set(const SimulationConfig& cfg,
                           std::vector<std::vector<Annotation>>&& per_image) {
  AnnotationSet set;
  set.label_space = LabelSpace::Merged;
  for (CariesClass c : cfg.classes) {
    if (!label_in_space(c, LabelSpace::Merged)) {
      set.label_space = LabelSpace::Raw;
      break;
    }
  }
  set.images.reserve(per_image.size());
  for (int i = 0; i < static_cast<int>(per_image.size()); ++i) {
    set.images.push_back({image_name(i), cfg.width, cfg.height, ImageStatus::Accepted});
    set.annotations.insert(set.annotations.end(),
                           std::make_move_iterator(per_image[i].begin()),
                           std::make_move_iterator(per_image[i].end()));
  }
  return set;
}

}  // namespace

AnnotationSet generate_ground_truth(const SimulationConfig& config, int jobs) {
  config.check();
  std::vector<std::vector<Annotation>> per_image(config.n_images);
  parallel_for(config.n_images, jobs,
               [&](int i) { per_image[i] = simulate_image_gt(config, i); });
  AnnotationSet set = assemble_set(config, std::move(per_image));
  validate_annotation_set(set, "simulated ground truth");
  return set;
}

AnnotationSet generate_ground_truth_serial(const SimulationConfig& config) {
  config.check();
  std::vector<std::vector<Annotation>> per_image(config.n_images);
  for (int i = 0; i < config.n_images; ++i) {
    per_image[i] = simulate_image_gt(config, i);
  }
  AnnotationSet set = assemble_set(config, std::move(per_image));
  validate_annotation_set(set, "simulated ground truth");
  return set;
}

namespace {

AnnotationSet render_impl(const AnnotationSet& ground_truth, const AnnotatorProfile& profile,
                          const SimulationConfig& config, int annotator_index, int jobs,
                          bool serial) {
  config.check();
  profile.check(config.classes.size());
  if (static_cast<int>(ground_truth.images.size()) != config.n_images) {
    throw ValidationError("render_annotator: ground truth does not match config");
  }
  const std::string source = "annotator_" + std::to_string(annotator_index + 1);

  std::unordered_map<std::string, std::vector<const Annotation*>> by_image;
  for (const Annotation& a : ground_truth.annotations) {
    by_image[a.image_id].push_back(&a);
  }
  static const std::vector<const Annotation*> kEmpty;

  std::vector<std::vector<Annotation>> per_image(config.n_images);
  auto body = [&](int i) {
    const auto it = by_image.find(ground_truth.images[i].id);
    per_image[i] = simulate_image_view(config, profile, annotator_index, i,
                                       it == by_image.end() ? kEmpty : it->second, source);
  };
  if (serial) {
    for (int i = 0; i < config.n_images; ++i) body(i);
  } else {
    parallel_for(config.n_images, jobs, body);
  }

  AnnotationSet set = assemble_set(config, std::move(per_image));
  validate_annotation_set(set, source);
  return set;
}

}  // namespace

AnnotationSet render_annotator(const AnnotationSet& ground_truth,
                               const AnnotatorProfile& profile,
                               const SimulationConfig& config, int annotator_index,
                               int jobs) {
  return render_impl(ground_truth, profile, config, annotator_index, jobs, false);
}

AnnotationSet render_annotator_serial(const AnnotationSet& ground_truth,
                                      const AnnotatorProfile& profile,
                                      const SimulationConfig& config, int annotator_index) {
  return render_impl(ground_truth, profile, config, annotator_index, 1, true);
}

RecoveryReport score_fusion_against_truth(const AnnotationSet& fused,
                                          const AnnotationSet& ground_truth,
                                          double iou_threshold) {
  RecoveryReport rep;
  rep.gt_count = static_cast<int>(ground_truth.annotations.size());
  rep.fused_count = static_cast<int>(fused.annotations.size());

  std::unordered_map<std::string, std::vector<const Annotation*>> fused_by_image;
  for (const Annotation& a : fused.annotations) fused_by_image[a.image_id].push_back(&a);
  std::unordered_map<std::string, std::vector<const Annotation*>> gt_by_image;
  for (const Annotation& a : ground_truth.annotations) {
    gt_by_image[a.image_id].push_back(&a);
  }

  double sq_center = 0.0;
  double abs_edge = 0.0;
  int labels_right = 0;
  for (const ImageInfo& im : ground_truth.images) {
    const auto git = gt_by_image.find(im.id);
    const auto fit = fused_by_image.find(im.id);
    if (git == gt_by_image.end() || fit == fused_by_image.end()) continue;
    const auto& gts = git->second;
    const auto& fus = fit->second;

    struct Pair {
      double overlap;
      std::size_t gi, fi;
    };
    std::vector<Pair> pairs;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      for (std::size_t fi = 0; fi < fus.size(); ++fi) {
        const double v = iou(gts[gi]->box, fus[fi]->box);
        if (v >= iou_threshold) pairs.push_back({v, gi, fi});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.overlap != b.overlap) return a.overlap > b.overlap;
      if (a.gi != b.gi) return a.gi < b.gi;
      return a.fi < b.fi;
    });
    std::vector<bool> gt_used(gts.size(), false), fu_used(fus.size(), false);
    for (const Pair& p : pairs) {
      if (gt_used[p.gi] || fu_used[p.fi]) continue;
      gt_used[p.gi] = true;
      fu_used[p.fi] = true;
      ++rep.matched;
      const BoundingBox& g = gts[p.gi]->box;
      const BoundingBox& f = fus[p.fi]->box;
      const double dx = g.center_x() - f.center_x();
      const double dy = g.center_y() - f.center_y();
      sq_center += dx * dx + dy * dy;
      abs_edge += std::abs(g.x_min - f.x_min) + std::abs(g.y_min - f.y_min) +
                  std::abs(g.x_max - f.x_max) + std::abs(g.y_max - f.y_max);
      if (gts[p.gi]->label == fus[p.fi]->label) ++labels_right;
    }
  }

  if (rep.matched > 0) {
    rep.center_rmse = std::sqrt(sq_center / rep.matched);
    rep.edge_mae = abs_edge / (4.0 * rep.matched);
    rep.label_accuracy = static_cast<double>(labels_right) / rep.matched;
  }
  if (rep.gt_count > 0) {
    rep.missed_fraction = static_cast<double>(rep.gt_count - rep.matched) / rep.gt_count;
  }
  if (rep.fused_count > 0) {
    rep.spurious_fraction =
        static_cast<double>(rep.fused_count - rep.matched) / rep.fused_count;
  }
  return rep;
}

}  // namespace bitefuse
