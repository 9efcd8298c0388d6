#pragma once

#include <string>
#include <vector>

#include "bitefuse/types.hpp"

namespace bitefuse {

// Enforces every AnnotationSet invariant: image ids unique, boxes valid and
// inside their image, labels in the declared space, confidences in [0,1],
// (image_id, source_id, box, label) tuples unique. Throws ValidationError.
// `context` prefixes error messages (typically a file path).
void validate_annotation_set(const AnnotationSet& set, const std::string& context = {});

// Grade1/2 -> EnamelCaries, Grade3/4/5 -> DentineCaries, SecondaryLesion
// unchanged. Input must be raw-labeled with no UnknownGrade annotations.
AnnotationSet merge_grades(const AnnotationSet& set);

struct FilterResult {
  AnnotationSet set;
  // per-category counts over the input; categories may overlap
  int rejected_images = 0;
  int unknown_grade_images = 0;
  int excluded_images = 0;
  int removed_images = 0;  // distinct images actually removed
  std::vector<std::string> warnings;
};

// Removes rejected images, images carrying any UnknownGrade annotation, and
// images listed in exclude_ids, together with their annotations. Unknown
// exclude ids produce warnings, not errors.
FilterResult filter_dataset(const AnnotationSet& set, bool drop_rejected,
                            bool drop_unknown_grade_images,
                            const std::vector<std::string>& exclude_ids);

}  // namespace bitefuse
