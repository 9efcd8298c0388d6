#include "bitefuse/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "bitefuse/annotations.hpp"
#include "bitefuse/errors.hpp"

namespace bitefuse {

namespace {

using ordered_json = nlohmann::ordered_json;

FileFormat detect_format(const std::filesystem::path& path, FileFormat format) {
  if (format != FileFormat::Auto) return format;
  const std::string ext = path.extension().string();
  if (ext == ".json") return FileFormat::Json;
  if (ext == ".csv") return FileFormat::Csv;
  throw ParseError("cannot infer format from extension of \"" + path.string() +
                   "\"; expected .json or .csv");
}

double parse_number(std::string_view text, const std::string& at) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(at + ": malformed number \"" + std::string(text) + "\"");
  }
  return v;
}

// --- CSV primitives ------------------------------------------------------

std::vector<std::string> split_csv_row(const std::string& line, int line_no,
                                       const std::string& context) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw ParseError(context + ": line " + std::to_string(line_no) +
                     ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr const char* kCsvHeader =
    "image_id,width,height,status,label_space,source_id,label,"
    "x_min,y_min,x_max,y_max,confidence";

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file \"" + path.string() + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file \"" + path.string() + "\"");
  out << text;
  if (!out) throw ParseError("write failed for \"" + path.string() + "\"");
}

// --- JSON ----------------------------------------------------------------

AnnotationSet parse_annotation_json(const std::string& text, const std::string& context) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(context + ": top level is not an object");

  AnnotationSet set;
  try {
    if (doc.contains("label_space")) {
      set.label_space = label_space_from_string(doc.at("label_space").get<std::string>());
    }
    bool center_size = false;
    if (doc.contains("bbox_format")) {
      const std::string fmt = doc.at("bbox_format").get<std::string>();
      if (fmt == "cxcywh") {
        center_size = true;
      } else if (fmt != "xyxy") {
        throw ParseError(context + ": unknown bbox_format \"" + fmt + "\"");
      }
    }

    int idx = 0;
    for (const auto& jim : doc.value("images", ordered_json::array())) {
      const std::string at = context + ": images[" + std::to_string(idx++) + "]";
      if (!jim.is_object()) throw ParseError(at + ": not an object");
      ImageInfo im;
      im.id = jim.at("id").get<std::string>();
      im.width = jim.at("width").get<double>();
      im.height = jim.at("height").get<double>();
      if (jim.contains("status")) {
        im.status = image_status_from_string(jim.at("status").get<std::string>());
      }
      set.images.push_back(std::move(im));
    }

    idx = 0;
    for (const auto& jan : doc.value("annotations", ordered_json::array())) {
      const std::string at = context + ": annotations[" + std::to_string(idx++) + "]";
      if (!jan.is_object()) throw ParseError(at + ": not an object");
      Annotation a;
      a.image_id = jan.at("image_id").get<std::string>();
      a.source_id = jan.at("source_id").get<std::string>();
      a.label = caries_class_from_string(jan.at("label").get<std::string>());
      const auto& bb = jan.at("bbox");
      if (!bb.is_array() || bb.size() != 4) {
        throw ParseError(at + ": bbox must be an array of 4 numbers");
      }
      const double b0 = bb[0].get<double>(), b1 = bb[1].get<double>(),
                   b2 = bb[2].get<double>(), b3 = bb[3].get<double>();
      if (center_size) {
        a.box = {b0 - b2 / 2.0, b1 - b3 / 2.0, b0 + b2 / 2.0, b1 + b3 / 2.0};
      } else {
        a.box = {b0, b1, b2, b3};
      }
      a.confidence = jan.value("confidence", 1.0);
      set.annotations.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }

  validate_annotation_set(set, context);
  return set;
}

std::string annotation_set_to_json(const AnnotationSet& set) {
  ordered_json doc;
  doc["images"] = ordered_json::array();
  for (const ImageInfo& im : set.images) {
    doc["images"].push_back({{"id", im.id},
                             {"width", im.width},
                             {"height", im.height},
                             {"status", to_string(im.status)}});
  }
  doc["annotations"] = ordered_json::array();
  for (const Annotation& a : set.annotations) {
    doc["annotations"].push_back(
        {{"image_id", a.image_id},
         {"source_id", a.source_id},
         {"label", to_string(a.label)},
         {"bbox", {a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max}},
         {"confidence", a.confidence}});
  }
  doc["label_space"] = to_string(set.label_space);
  return doc.dump(2) + "\n";
}

// --- CSV -----------------------------------------------------------------
// Layout: one leading row per image (annotation columns empty), then one
// row per annotation carrying its image's metadata, so a parse/serialize
// round trip reproduces both image order and annotation order.

AnnotationSet parse_annotation_csv(const std::string& text, const std::string& context) {
  AnnotationSet set;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw ParseError(context + ": missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ParseError(context + ": unexpected header \"" + line + "\"");
  }

  std::unordered_map<std::string, std::size_t> image_index;
  bool space_set = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = context + ": line " + std::to_string(line_no);
    const std::vector<std::string> f = split_csv_row(line, line_no, context);
    if (f.size() != 12) {
      throw ParseError(at + ": expected 12 fields, got " + std::to_string(f.size()));
    }

    const LabelSpace row_space = label_space_from_string(f[4]);
    if (space_set && row_space != set.label_space) {
      throw ParseError(at + ": inconsistent label_space");
    }
    set.label_space = row_space;
    space_set = true;

    ImageInfo im;
    im.id = f[0];
    im.width = parse_number(f[1], at);
    im.height = parse_number(f[2], at);
    im.status = image_status_from_string(f[3]);

    const auto it = image_index.find(im.id);
    if (it == image_index.end()) {
      image_index.emplace(im.id, set.images.size());
      set.images.push_back(im);
    } else if (!(set.images[it->second] == im)) {
      throw ParseError(at + ": image metadata conflicts with earlier row for \"" +
                       im.id + "\"");
    }

    const bool image_only = f[5].empty() && f[6].empty() && f[7].empty() &&
                            f[8].empty() && f[9].empty() && f[10].empty() &&
                            f[11].empty();
    if (image_only) continue;

    Annotation a;
    a.image_id = f[0];
    a.source_id = f[5];
    a.label = caries_class_from_string(f[6]);
    a.box = {parse_number(f[7], at), parse_number(f[8], at), parse_number(f[9], at),
             parse_number(f[10], at)};
    a.confidence = f[11].empty() ? 1.0 : parse_number(f[11], at);
    set.annotations.push_back(std::move(a));
  }

  validate_annotation_set(set, context);
  return set;
}

std::string annotation_set_to_csv(const AnnotationSet& set) {
  std::unordered_map<std::string, const ImageInfo*> by_id;
  for (const ImageInfo& im : set.images) by_id.emplace(im.id, &im);

  std::string out = kCsvHeader;
  out += '\n';
  auto image_fields = [](const ImageInfo& im) {
    return csv_escape(im.id) + ',' + format_double(im.width) + ',' +
           format_double(im.height) + ',' + std::string(to_string(im.status));
  };
  const std::string space(to_string(set.label_space));
  for (const ImageInfo& im : set.images) {
    out += image_fields(im) + ',' + space + ",,,,,,,\n";
  }
  for (const Annotation& a : set.annotations) {
    const ImageInfo& im = *by_id.at(a.image_id);
    out += image_fields(im) + ',' + space + ',' + csv_escape(a.source_id) + ',' +
           std::string(to_string(a.label)) + ',' + format_double(a.box.x_min) + ',' +
           format_double(a.box.y_min) + ',' + format_double(a.box.x_max) + ',' +
           format_double(a.box.y_max) + ',' + format_double(a.confidence) + '\n';
  }
  return out;
}

// --- files ---------------------------------------------------------------

AnnotationSet parse_annotation_file(const std::filesystem::path& path, FileFormat format) {
  const FileFormat fmt = detect_format(path, format);
  const std::string text = read_text_file(path);
  return fmt == FileFormat::Json ? parse_annotation_json(text, path.string())
                                 : parse_annotation_csv(text, path.string());
}

void write_annotation_file(const AnnotationSet& set, const std::filesystem::path& path,
                           FileFormat format) {
  const FileFormat fmt = detect_format(path, format);
  write_text_file(path, fmt == FileFormat::Json ? annotation_set_to_json(set)
                                                : annotation_set_to_csv(set));
}

AnnotationSet merge_annotation_sets(const std::vector<AnnotationSet>& sets) {
  if (sets.empty()) throw ValidationError("merge_annotation_sets: no input sets");
  AnnotationSet out;
  out.label_space = sets.front().label_space;
  std::unordered_map<std::string, std::size_t> image_index;
  for (const AnnotationSet& s : sets) {
    if (s.label_space != out.label_space) {
      throw ValidationError("merge_annotation_sets: mixed label spaces");
    }
    for (const ImageInfo& im : s.images) {
      const auto it = image_index.find(im.id);
      if (it == image_index.end()) {
        image_index.emplace(im.id, out.images.size());
        out.images.push_back(im);
      } else if (!(out.images[it->second] == im)) {
        throw ValidationError("merge_annotation_sets: image \"" + im.id +
                              "\" has conflicting metadata");
      }
    }
    out.annotations.insert(out.annotations.end(), s.annotations.begin(),
                           s.annotations.end());
  }
  validate_annotation_set(out);
  return out;
}

}  // namespace bitefuse
