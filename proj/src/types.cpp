#include "bitefuse/types.hpp"

#include <algorithm>
#include <cmath>

#include "bitefuse/errors.hpp"

namespace bitefuse {

std::string_view to_string(CariesClass c) {
  switch (c) {
    case CariesClass::Grade1: return "grade_1";
    case CariesClass::Grade2: return "grade_2";
    case CariesClass::Grade3: return "grade_3";
    case CariesClass::Grade4: return "grade_4";
    case CariesClass::Grade5: return "grade_5";
    case CariesClass::SecondaryLesion: return "secondary_lesion";
    case CariesClass::UnknownGrade: return "unknown_grade";
    case CariesClass::EnamelCaries: return "enamel_caries";
    case CariesClass::DentineCaries: return "dentine_caries";
  }
  return "?";
}

std::string_view to_string(LabelSpace s) {
  return s == LabelSpace::Raw ? "raw" : "merged";
}

std::string_view to_string(ImageStatus s) {
  return s == ImageStatus::Accepted ? "accepted" : "rejected";
}

CariesClass caries_class_from_string(std::string_view s) {
  static constexpr std::pair<std::string_view, CariesClass> table[] = {
      {"grade_1", CariesClass::Grade1},
      {"grade_2", CariesClass::Grade2},
      {"grade_3", CariesClass::Grade3},
      {"grade_4", CariesClass::Grade4},
      {"grade_5", CariesClass::Grade5},
      {"secondary_lesion", CariesClass::SecondaryLesion},
      {"unknown_grade", CariesClass::UnknownGrade},
      {"enamel_caries", CariesClass::EnamelCaries},
      {"dentine_caries", CariesClass::DentineCaries},
  };
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ParseError("unknown label string: \"" + std::string(s) + "\"");
}

LabelSpace label_space_from_string(std::string_view s) {
  if (s == "raw") return LabelSpace::Raw;
  if (s == "merged") return LabelSpace::Merged;
  throw ParseError("unknown label_space: \"" + std::string(s) + "\"");
}

ImageStatus image_status_from_string(std::string_view s) {
  if (s == "accepted") return ImageStatus::Accepted;
  if (s == "rejected") return ImageStatus::Rejected;
  throw ParseError("unknown image status: \"" + std::string(s) + "\"");
}

bool label_in_space(CariesClass c, LabelSpace space) {
  switch (c) {
    case CariesClass::SecondaryLesion:
      return true;
    case CariesClass::EnamelCaries:
    case CariesClass::DentineCaries:
      return space == LabelSpace::Merged;
    default:
      return space == LabelSpace::Raw;
  }
}

SeverityOrder SeverityOrder::defaults() {
  SeverityOrder o;
  auto set = [&o](CariesClass c, int r) { o.ranks_[static_cast<std::size_t>(c)] = r; };
  // raw space, ascending severity
  set(CariesClass::Grade1, 0);
  set(CariesClass::Grade2, 1);
  set(CariesClass::SecondaryLesion, 2);
  set(CariesClass::Grade3, 3);
  set(CariesClass::Grade4, 4);
  set(CariesClass::Grade5, 5);
  set(CariesClass::UnknownGrade, -1);
  // merged space shares SecondaryLesion's middle rank
  set(CariesClass::EnamelCaries, 1);
  set(CariesClass::DentineCaries, 3);
  return o;
}

SeverityOrder SeverityOrder::from_ascending(const std::vector<CariesClass>& ascending) {
  SeverityOrder o = defaults();
  int r = 0;
  for (CariesClass c : ascending) o.ranks_[static_cast<std::size_t>(c)] = r++;
  return o;
}

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max &&
         y_min < y_max;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

const ImageInfo* AnnotationSet::find_image(std::string_view id) const {
  for (const ImageInfo& im : images) {
    if (im.id == id) return &im;
  }
  return nullptr;
}

}  // namespace bitefuse
