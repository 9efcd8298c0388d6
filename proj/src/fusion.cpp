#include "bitefuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "bitefuse/errors.hpp"
#include "bitefuse/parallel.hpp"
#include "bitefuse/stats.hpp"

namespace bitefuse {

void FusionConfig::check() const {
  if (!(grouping_iou > 0.0 && grouping_iou <= 1.0)) {
    throw ConfigError("fusion: grouping_iou must be in (0,1]");
  }
  if (!(mass_p > 0.0 && mass_p < 1.0)) {
    throw ConfigError("fusion: mass_p must be in (0,1)");
  }
  if (!(sigma_divisor > 0.0)) {
    throw ConfigError("fusion: sigma_divisor must be positive");
  }
  if (min_votes < 1) {
    throw ConfigError("fusion: min_votes must be >= 1");
  }
}

double AxisMixture::cdf(double x) const {
  double s = 0.0;
  for (const GaussianComponent& c : components) {
    s += normal_cdf((x - c.mean) / c.sigma);
  }
  return s / static_cast<double>(components.size());
}

GaussianComponent fit_axis_gaussian(double lo, double hi, double sigma_divisor) {
  if (!(lo < hi)) {
    throw ValidationError("fit_axis_gaussian: degenerate interval");
  }
  return {0.5 * (lo + hi), (hi - lo) / sigma_divisor};
}

double mixture_quantile(const AxisMixture& mix, double q) {
  if (mix.components.empty()) {
    throw ValidationError("mixture_quantile: empty mixture");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw ValidationError("mixture_quantile: q must be in (0,1)");
  }
  double lo = mix.components.front().mean - 10.0 * mix.components.front().sigma;
  double hi = mix.components.front().mean + 10.0 * mix.components.front().sigma;
  for (const GaussianComponent& c : mix.components) {
    lo = std::min(lo, c.mean - 10.0 * c.sigma);
    hi = std::max(hi, c.mean + 10.0 * c.sigma);
  }
  // monotone CDF: plain bisection to 1e-9 px
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mix.cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

bool canonical_less(const Annotation& a, const Annotation& b) {
  const double aa = a.box.area();
  const double ba = b.box.area();
  if (aa != ba) return aa > ba;
  if (a.box != b.box) return a.box < b.box;
  if (a.source_id != b.source_id) return a.source_id < b.source_id;
  return to_string(a.label) < to_string(b.label);
}

namespace {

struct Group {
  std::vector<Annotation> members;
  // running per-edge sums for the arithmetic mean box
  double sx0 = 0.0, sy0 = 0.0, sx1 = 0.0, sy1 = 0.0;

  BoundingBox mean_box() const {
    const double n = static_cast<double>(members.size());
    return {sx0 / n, sy0 / n, sx1 / n, sy1 / n};
  }
  void add(const Annotation& a) {
    members.push_back(a);
    sx0 += a.box.x_min;
    sy0 += a.box.y_min;
    sx1 += a.box.x_max;
    sy1 += a.box.y_max;
  }
  void remove_at(std::size_t i) {
    const Annotation& a = members[i];
    sx0 -= a.box.x_min;
    sy0 -= a.box.y_min;
    sx1 -= a.box.x_max;
    sy1 -= a.box.y_max;
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(i));
  }
};

}  // namespace

std::vector<std::vector<Annotation>> group_boxes(const std::vector<Annotation>& annotations,
                                                 const FusionConfig& config) {
  config.check();
  if (annotations.empty()) return {};
  for (const Annotation& a : annotations) {
    if (a.image_id != annotations.front().image_id) {
      throw ValidationError("group_boxes: annotations span multiple images");
    }
  }

  std::vector<Annotation> ordered = annotations;
  std::sort(ordered.begin(), ordered.end(), canonical_less);

  std::vector<Group> groups;
  for (const Annotation& a : ordered) {
    bool placed = false;
    const std::size_t n_groups = groups.size();  // new groups never re-scanned
    for (std::size_t gi = 0; gi < n_groups && !placed; ++gi) {
      Group& g = groups[gi];
      const double overlap = iou(g.mean_box(), a.box);
      if (overlap < config.grouping_iou) continue;

      std::size_t same_source = g.members.size();
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        if (g.members[i].source_id == a.source_id) {
          same_source = i;
          break;
        }
      }
      if (same_source == g.members.size()) {
        g.add(a);
        placed = true;
        break;
      }
      // one vote per source: keep whichever box overlaps the running mean
      // better, the other one seeds its own group
      const double existing = iou(g.mean_box(), g.members[same_source].box);
      if (existing >= overlap) continue;
      Annotation displaced = g.members[same_source];
      g.remove_at(same_source);
      g.add(a);
      Group fresh;
      fresh.add(displaced);
      groups.push_back(std::move(fresh));  // invalidates g; not used past here
      placed = true;
    }
    if (!placed) {
      Group fresh;
      fresh.add(a);
      groups.push_back(std::move(fresh));
    }
  }

  std::vector<std::vector<Annotation>> out;
  out.reserve(groups.size());
  for (Group& g : groups) out.push_back(std::move(g.members));
  return out;
}

FusedBox fuse_group(const std::vector<Annotation>& members, const FusionConfig& config) {
  config.check();
  if (members.empty()) {
    throw ValidationError("fuse_group: empty member list");
  }
  FusedBox fused;
  for (const Annotation& m : members) {
    fused.x_mixture.components.push_back(
        fit_axis_gaussian(m.box.x_min, m.box.x_max, config.sigma_divisor));
    fused.y_mixture.components.push_back(
        fit_axis_gaussian(m.box.y_min, m.box.y_max, config.sigma_divisor));
  }
  const double q_lo = (1.0 - config.mass_p) / 2.0;
  const double q_hi = (1.0 + config.mass_p) / 2.0;
  fused.box.x_min = mixture_quantile(fused.x_mixture, q_lo);
  fused.box.x_max = mixture_quantile(fused.x_mixture, q_hi);
  fused.box.y_min = mixture_quantile(fused.y_mixture, q_lo);
  fused.box.y_max = mixture_quantile(fused.y_mixture, q_hi);
  return fused;
}

VoteResult vote_label(const std::vector<Annotation>& members, const SeverityOrder& severity,
                      int min_votes) {
  if (members.empty()) {
    throw ValidationError("vote_label: empty member list");
  }
  VoteResult res;
  std::unordered_set<std::string> sources;
  for (const Annotation& m : members) {
    ++res.tally[m.label];
    sources.insert(m.source_id);
  }
  res.support = static_cast<int>(sources.size());
  res.dropped = res.support < min_votes;

  int best_count = -1;
  for (const auto& [label, count] : res.tally) {
    if (count > best_count ||
        (count == best_count && severity.more_severe(label, res.label))) {
      res.label = label;
      best_count = count;
    }
  }
  return res;
}

std::vector<BoundingBox> nms_fuse(const std::vector<Annotation>& members,
                                  double iou_threshold) {
  if (members.empty()) {
    throw ValidationError("nms_fuse: empty member list");
  }
  std::vector<Annotation> ordered = members;
  std::sort(ordered.begin(), ordered.end(), canonical_less);

  std::vector<BoundingBox> kept;
  std::vector<bool> suppressed(ordered.size(), false);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(ordered[i].box);
    for (std::size_t j = i + 1; j < ordered.size(); ++j) {
      if (!suppressed[j] && iou(ordered[i].box, ordered[j].box) >= iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

namespace {

struct ImageFusion {
  std::vector<Annotation> consensus;
  std::vector<GroupDiagnostics> groups;
};

ImageFusion fuse_image(const ImageInfo& image, const std::vector<Annotation>& annotations,
                       const FusionConfig& config) {
  ImageFusion out;
  if (annotations.empty()) return out;

  std::unordered_set<std::string> sources;
  for (const Annotation& a : annotations) sources.insert(a.source_id);
  const double n_sources = static_cast<double>(sources.size());

  for (std::vector<Annotation>& members : group_boxes(annotations, config)) {
    const VoteResult vote = vote_label(members, config.severity, config.min_votes);

    GroupDiagnostics diag;
    diag.image_id = image.id;
    diag.tally = vote.tally;
    diag.label = vote.label;
    diag.support = vote.support;
    diag.dropped = vote.dropped;

    if (!vote.dropped) {
      if (config.strategy == FusionStrategy::Gmm) {
        diag.boxes.push_back(fuse_group(members, config).box);
      } else {
        diag.boxes = nms_fuse(members, config.grouping_iou);
      }
      for (const BoundingBox& raw : diag.boxes) {
        Annotation c;
        c.image_id = image.id;
        c.source_id = "consensus";
        c.label = vote.label;
        // quantile intervals can spill past the image edge; clamp back
        c.box.x_min = std::clamp(raw.x_min, 0.0, image.width);
        c.box.x_max = std::clamp(raw.x_max, 0.0, image.width);
        c.box.y_min = std::clamp(raw.y_min, 0.0, image.height);
        c.box.y_max = std::clamp(raw.y_max, 0.0, image.height);
        c.confidence = static_cast<double>(vote.support) / n_sources;
        out.consensus.push_back(std::move(c));
      }
    }
    diag.members = std::move(members);
    out.groups.push_back(std::move(diag));
  }
  return out;
}

FusionOutput assemble(const AnnotationSet& set, std::vector<ImageFusion>&& per_image) {
  FusionOutput out;
  out.consensus.images = set.images;
  out.consensus.label_space = set.label_space;
  for (ImageFusion& f : per_image) {
    out.consensus.annotations.insert(out.consensus.annotations.end(),
                                     std::make_move_iterator(f.consensus.begin()),
                                     std::make_move_iterator(f.consensus.end()));
    out.groups.insert(out.groups.end(), std::make_move_iterator(f.groups.begin()),
                      std::make_move_iterator(f.groups.end()));
  }
  return out;
}

std::vector<std::vector<Annotation>> annotations_by_image(const AnnotationSet& set) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(set.images.size());
  for (std::size_t i = 0; i < set.images.size(); ++i) index.emplace(set.images[i].id, i);
  std::vector<std::vector<Annotation>> per_image(set.images.size());
  for (const Annotation& a : set.annotations) {
    per_image[index.at(a.image_id)].push_back(a);
  }
  return per_image;
}

}  // namespace

FusionOutput fuse_annotation_set(const AnnotationSet& set, const FusionConfig& config,
                                 int jobs) {
  config.check();
  const auto per_image_annotations = annotations_by_image(set);
  std::vector<ImageFusion> results(set.images.size());
  parallel_for(static_cast<int>(set.images.size()), jobs, [&](int i) {
    results[i] = fuse_image(set.images[i], per_image_annotations[i], config);
  });
  return assemble(set, std::move(results));
}

FusionOutput fuse_annotation_set_serial(const AnnotationSet& set,
                                        const FusionConfig& config) {
  config.check();
  const auto per_image_annotations = annotations_by_image(set);
  std::vector<ImageFusion> results(set.images.size());
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    results[i] = fuse_image(set.images[i], per_image_annotations[i], config);
  }
  return assemble(set, std::move(results));
}

}  // namespace bitefuse
