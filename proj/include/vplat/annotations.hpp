// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vplat/feature_model.hpp"
#include "vplat/presence_condition.hpp"

// Readers and writers for feature-model files (.vp-project), mapping files
// (.vp-folder, .vp-files) and embedded &begin/&end/&line annotations.
namespace vplat {

inline constexpr std::string_view kFeatureModelExt = ".vp-project";
inline constexpr std::string_view kFolderMappingFile = ".vp-folder";
inline constexpr std::string_view kFilesMappingFile = ".vp-files";

// A feature-model tree detached from any store.
struct FeatureSpec {
  std::string name;
  bool optional = false;
  GroupKind group = GroupKind::And;
  std::vector<FeatureSpec> children;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct FeatureModelDocument {
  FeatureSpec root;
  std::vector<FeatureSpec> unassigned;  // children of the UNASSIGNED bucket

  friend bool operator==(const FeatureModelDocument&, const FeatureModelDocument&) = default;
};

// One feature per line, depth given by leading tabs. A trailing '?' marks an
// optional feature; a leading and/or/xor keyword on a first child sets the
// parent's group kind. A depth-1 line named UNASSIGNED collects its
// children into the bucket.
FeatureModelDocument parse_feature_model_file(std::string_view text);
std::string serialize_feature_model(const FeatureModelDocument& doc);

FeatureModelDocument extract_feature_model(const FeatureStore& store, ModelId model);
// Materialises a document as a new model (all versions 0).
ModelId instantiate_feature_model(FeatureStore& store, const FeatureModelDocument& doc);

struct AnnotationSpan {
  enum class Kind { Block, Line };
  std::vector<std::string> features;
  std::size_t start_line = 0;  // 1-based, inclusive
  std::size_t end_line = 0;
  Kind kind = Kind::Block;
  std::vector<AnnotationSpan> children;

  friend bool operator==(const AnnotationSpan&, const AnnotationSpan&) = default;
};

// Outermost spans in order of appearance; nested spans hang off their parent.
std::vector<AnnotationSpan> parse_annotations(std::string_view text);

// Block structure derived from annotations: one node per span.
struct BlockSpec {
  std::string name;  // "block[A,B]" / "line[A]", "#n" suffix for repeats
  std::vector<std::string> features;
  PresenceCondition pc;
  std::string content;  // the span's lines, markers included
  std::vector<BlockSpec> children;
};

std::vector<BlockSpec> build_file_structure(std::string_view text);
std::vector<BlockSpec> build_file_structure(std::string_view text, const std::vector<AnnotationSpan>& spans);

enum class MappingScope { Folder, Files };

struct MappingEntry {
  std::string asset;  // empty for Folder scope
  std::vector<std::string> features;

  friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

struct MappingDocument {
  MappingScope scope = MappingScope::Folder;
  std::vector<MappingEntry> entries;
};

// Folder scope: one feature per line. Files scope: "file<TAB>f1,f2" rows.
MappingDocument parse_mapping_file(std::string_view text, MappingScope scope);
std::string serialize_mapping_file(const MappingDocument& doc);

// Splits text into lines, accepting LF and CRLF.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace vplat
