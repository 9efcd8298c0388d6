#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bitefuse/types.hpp"

namespace bitefuse {

enum class FileFormat { Auto, Json, Csv };

// Parses and fully validates an annotation file. Auto format picks by
// extension (.json / .csv). Throws ParseError on malformed input (with the
// offending record or line) and ValidationError on invariant violations.
AnnotationSet parse_annotation_file(const std::filesystem::path& path,
                                    FileFormat format = FileFormat::Auto);

// Writers; parse(serialize(set)) reproduces `set` field-for-field.
void write_annotation_file(const AnnotationSet& set, const std::filesystem::path& path,
                           FileFormat format = FileFormat::Auto);

// String-level entry points, used by the file functions and by tests.
AnnotationSet parse_annotation_json(const std::string& text, const std::string& context);
AnnotationSet parse_annotation_csv(const std::string& text, const std::string& context);
std::string annotation_set_to_json(const AnnotationSet& set);
std::string annotation_set_to_csv(const AnnotationSet& set);

// Merges several sets into one: images unioned (metadata must agree),
// annotations concatenated in input order, label spaces must match.
AnnotationSet merge_annotation_sets(const std::vector<AnnotationSet>& sets);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Shortest round-trip decimal rendering (std::to_chars).
std::string format_double(double v);

}  // namespace bitefuse
