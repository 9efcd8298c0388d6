#include "bitefuse/annotations.hpp"

#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "bitefuse/errors.hpp"

namespace bitefuse {

namespace {

std::string where(const std::string& context) {
  return context.empty() ? std::string() : context + ": ";
}

}  // namespace

void validate_annotation_set(const AnnotationSet& set, const std::string& context) {
  std::unordered_map<std::string, const ImageInfo*> by_id;
  by_id.reserve(set.images.size());
  for (const ImageInfo& im : set.images) {
    if (im.id.empty()) {
      throw ValidationError(where(context) + "image with empty id");
    }
    if (!(im.width > 0.0) || !(im.height > 0.0) || !std::isfinite(im.width) ||
        !std::isfinite(im.height)) {
      throw ValidationError(where(context) + "image \"" + im.id +
                            "\" has non-positive dimensions");
    }
    if (!by_id.emplace(im.id, &im).second) {
      throw ValidationError(where(context) + "duplicate image id \"" + im.id + "\"");
    }
  }

  using Key = std::tuple<std::string, std::string, double, double, double, double, int>;
  std::set<Key> seen;
  std::size_t index = 0;
  for (const Annotation& a : set.annotations) {
    const std::string at = where(context) + "annotation #" + std::to_string(index);
    const auto it = by_id.find(a.image_id);
    if (it == by_id.end()) {
      throw ValidationError(at + ": unknown image_id \"" + a.image_id + "\"");
    }
    if (a.source_id.empty()) {
      throw ValidationError(at + ": empty source_id");
    }
    if (!a.box.valid()) {
      throw ValidationError(at + ": degenerate box [" + std::to_string(a.box.x_min) +
                            ", " + std::to_string(a.box.y_min) + ", " +
                            std::to_string(a.box.x_max) + ", " +
                            std::to_string(a.box.y_max) + "]");
    }
    const ImageInfo& im = *it->second;
    if (a.box.x_max > im.width || a.box.y_max > im.height) {
      throw ValidationError(at + ": box outside image \"" + a.image_id + "\" bounds");
    }
    if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) {
      throw ValidationError(at + ": confidence outside [0,1]");
    }
    if (!label_in_space(a.label, set.label_space)) {
      throw ValidationError(at + ": label \"" + std::string(to_string(a.label)) +
                            "\" not in " + std::string(to_string(set.label_space)) +
                            " label space");
    }
    Key key{a.image_id, a.source_id, a.box.x_min, a.box.y_min,
            a.box.x_max, a.box.y_max,  static_cast<int>(a.label)};
    if (!seen.insert(std::move(key)).second) {
      throw ValidationError(at + ": duplicate (image, source, box, label) tuple");
    }
    ++index;
  }
}

AnnotationSet merge_grades(const AnnotationSet& set) {
  if (set.label_space != LabelSpace::Raw) {
    throw ValidationError("merge_grades: input is already merged-labeled");
  }
  AnnotationSet out = set;
  out.label_space = LabelSpace::Merged;
  for (Annotation& a : out.annotations) {
    switch (a.label) {
      case CariesClass::Grade1:
      case CariesClass::Grade2:
        a.label = CariesClass::EnamelCaries;
        break;
      case CariesClass::Grade3:
      case CariesClass::Grade4:
      case CariesClass::Grade5:
        a.label = CariesClass::DentineCaries;
        break;
      case CariesClass::SecondaryLesion:
        break;
      case CariesClass::UnknownGrade:
        throw ValidationError("merge_grades: UnknownGrade annotation on image \"" +
                              a.image_id + "\"; filter unknown-grade images first");
      default:
        throw ValidationError("merge_grades: merged label in raw-labeled set");
    }
  }
  return out;
}

FilterResult filter_dataset(const AnnotationSet& set, bool drop_rejected,
                            bool drop_unknown_grade_images,
                            const std::vector<std::string>& exclude_ids) {
  FilterResult res;

  std::unordered_set<std::string> unknown_grade;
  for (const Annotation& a : set.annotations) {
    if (a.label == CariesClass::UnknownGrade) unknown_grade.insert(a.image_id);
  }

  std::unordered_set<std::string> known_ids;
  for (const ImageInfo& im : set.images) known_ids.insert(im.id);
  std::unordered_set<std::string> excluded;
  for (const std::string& id : exclude_ids) {
    if (known_ids.count(id)) {
      excluded.insert(id);
    } else {
      res.warnings.push_back("exclude id \"" + id + "\" not in dataset");
    }
  }

  std::unordered_set<std::string> removed;
  for (const ImageInfo& im : set.images) {
    bool drop = false;
    if (drop_rejected && im.status == ImageStatus::Rejected) {
      ++res.rejected_images;
      drop = true;
    }
    if (drop_unknown_grade_images && unknown_grade.count(im.id)) {
      ++res.unknown_grade_images;
      drop = true;
    }
    if (excluded.count(im.id)) {
      ++res.excluded_images;
      drop = true;
    }
    if (drop) {
      removed.insert(im.id);
    } else {
      res.set.images.push_back(im);
    }
  }
  res.removed_images = static_cast<int>(removed.size());

  res.set.label_space = set.label_space;
  for (const Annotation& a : set.annotations) {
    if (!removed.count(a.image_id)) res.set.annotations.push_back(a);
  }
  return res;
}

}  // namespace bitefuse
