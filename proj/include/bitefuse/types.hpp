#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bitefuse {

enum class CariesClass : std::uint8_t {
  Grade1,
  Grade2,
  Grade3,
  Grade4,
  Grade5,
  SecondaryLesion,
  UnknownGrade,
  EnamelCaries,
  DentineCaries,
};

enum class LabelSpace : std::uint8_t { Raw, Merged };

enum class ImageStatus : std::uint8_t { Accepted, Rejected };

std::string_view to_string(CariesClass c);
std::string_view to_string(LabelSpace s);
std::string_view to_string(ImageStatus s);

// Throws ParseError on unknown strings.
CariesClass caries_class_from_string(std::string_view s);
LabelSpace label_space_from_string(std::string_view s);
ImageStatus image_status_from_string(std::string_view s);

// True when the label belongs to the given space. SecondaryLesion belongs
// to both; UnknownGrade is raw-only.
bool label_in_space(CariesClass c, LabelSpace space);

// Total severity order used for vote tie-breaking. Higher rank = more
// severe. Defaults: raw Grade5 > Grade4 > Grade3 > SecondaryLesion >
// Grade2 > Grade1; merged DentineCaries > SecondaryLesion > EnamelCaries.
class SeverityOrder {
 public:
  static SeverityOrder defaults();
  // `ascending` lists classes from least to most severe.
  static SeverityOrder from_ascending(const std::vector<CariesClass>& ascending);

  int rank(CariesClass c) const { return ranks_[static_cast<std::size_t>(c)]; }
  bool more_severe(CariesClass a, CariesClass b) const { return rank(a) > rank(b); }

 private:
  SeverityOrder() { ranks_.fill(-1); }
  std::array<int, 9> ranks_{};
};

// Axis-aligned box, continuous pixel coordinates, origin top-left.
// Valid boxes satisfy 0 <= x_min < x_max, 0 <= y_min < y_max, all finite.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  bool valid() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
  // lexicographic on (x_min, y_min, x_max, y_max)
  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct ImageInfo {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  ImageStatus status = ImageStatus::Accepted;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Annotation {
  std::string image_id;
  std::string source_id;
  CariesClass label = CariesClass::Grade1;
  BoundingBox box;
  double confidence = 1.0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotationSet {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  LabelSpace label_space = LabelSpace::Raw;

  const ImageInfo* find_image(std::string_view id) const;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

}  // namespace bitefuse
