// SPDX-License-Identifier: Apache-2.0
#include "vplat/annotations.hpp"

#include <map>
#include <optional>
#include <regex>
#include <set>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

// ---- feature-model files -------------------------------------------------

namespace {

struct FmLine {
  std::size_t number;
  std::size_t depth;
  std::optional<GroupKind> keyword;
  std::string name;
  bool optional;
};

std::string at_line(std::size_t n) { return "line " + std::to_string(n); }

std::vector<FmLine> lex_feature_model(std::string_view text) {
  std::vector<FmLine> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& raw = lines[i];
    if (trim(raw).empty()) continue;
    const std::size_t n = i + 1;
    std::size_t depth = 0;
    while (depth < raw.size() && raw[depth] == '\t') ++depth;
    if (raw[depth] == ' ') fail(ErrorCode::BadIndent, at_line(n) + ": indentation must use tabs");
    std::string body(trim(std::string_view(raw).substr(depth)));
    FmLine fl{n, depth, std::nullopt, {}, false};
    auto words = split(body, ' ');
    std::erase_if(words, [](const std::string& w) { return w.empty(); });
    if (words.size() == 2) {
      fl.keyword = parse_group_kind(words[0]);
      if (!fl.keyword) fail(ErrorCode::InvalidName, at_line(n) + ": unexpected '" + words[0] + "'");
      body = words[1];
    } else if (words.size() != 1) {
      fail(ErrorCode::InvalidName, at_line(n) + ": '" + body + "' is not a feature name");
    }
    if (!body.empty() && body.back() == '?') {
      fl.optional = true;
      body.pop_back();
    }
    if (!is_valid_feature_name(body)) {
      fail(ErrorCode::InvalidName, at_line(n) + ": '" + body + "' is not a feature name");
    }
    fl.name = std::move(body);
    out.push_back(std::move(fl));
  }
  return out;
}

// Builds the children of the line at `parent_index` from `pos` onwards.
void build_children(const std::vector<FmLine>& lines, std::size_t& pos, std::size_t depth,
                    FeatureSpec& parent) {
  bool first = true;
  while (pos < lines.size() && lines[pos].depth == depth) {
    const FmLine& l = lines[pos];
    if (l.keyword) {
      if (!first) {
        fail(ErrorCode::MisplacedGroupKeyword,
             at_line(l.number) + ": group keyword allowed on the first child only");
      }
      parent.group = *l.keyword;
    }
    first = false;
    FeatureSpec spec;
    spec.name = l.name;
    spec.optional = l.optional;
    ++pos;
    if (pos < lines.size() && lines[pos].depth > depth + 1) {
      fail(ErrorCode::BadIndent, at_line(lines[pos].number) + ": indentation jumps more than one level");
    }
    build_children(lines, pos, depth + 1, spec);
    parent.children.push_back(std::move(spec));
  }
}

void collect_names(const FeatureSpec& f, std::set<std::string>& seen) {
  if (!seen.insert(f.name).second) fail(ErrorCode::DuplicateFeatureName, "'" + f.name + "'");
  for (const auto& c : f.children) collect_names(c, seen);
}

void emit(const FeatureSpec& f, std::size_t depth, std::optional<GroupKind> keyword, std::string& out) {
  out.append(depth, '\t');
  if (keyword && *keyword != GroupKind::And) {
    out += to_string(*keyword);
    out += ' ';
  }
  out += f.name;
  if (f.optional) out += '?';
  out += '\n';
  bool first = true;
  for (const auto& c : f.children) {
    emit(c, depth + 1, first ? std::optional<GroupKind>(f.group) : std::nullopt, out);
    first = false;
  }
}

FeatureSpec extract_spec(const FeatureStore& store, FeatureId id) {
  const Feature& f = store.get(id);
  FeatureSpec spec{f.name, f.optional, f.group, {}};
  for (FeatureId c : f.children) {
    if (store.is_unassigned(c)) continue;
    spec.children.push_back(extract_spec(store, c));
  }
  return spec;
}

void instantiate_children(FeatureStore& store, FeatureId parent, const std::vector<FeatureSpec>& children) {
  for (const auto& c : children) {
    const FeatureId id = store.create_feature(c.name, parent);
    Feature& f = store.get_mut(id);
    f.optional = c.optional;
    f.group = c.group;
    instantiate_children(store, id, c.children);
  }
}

}  // namespace

FeatureModelDocument parse_feature_model_file(std::string_view text) {
  const auto lines = lex_feature_model(text);
  if (lines.empty()) fail(ErrorCode::EmptyDocument, "feature model has no features");
  if (lines[0].depth != 0) fail(ErrorCode::BadIndent, at_line(lines[0].number) + ": root must not be indented");
  if (lines[0].keyword) {
    fail(ErrorCode::MisplacedGroupKeyword, at_line(lines[0].number) + ": the root takes no group keyword");
  }
  FeatureModelDocument doc;
  doc.root.name = lines[0].name;
  doc.root.optional = lines[0].optional;
  std::size_t pos = 1;
  if (pos < lines.size() && lines[pos].depth > 1) {
    fail(ErrorCode::BadIndent, at_line(lines[pos].number) + ": indentation jumps more than one level");
  }
  build_children(lines, pos, 1, doc.root);
  if (pos < lines.size()) fail(ErrorCode::BadIndent, at_line(lines[pos].number) + ": second root feature");

  // Pull the bucket out of the hierarchy.
  auto& kids = doc.root.children;
  for (auto it = kids.begin(); it != kids.end(); ++it) {
    if (it->name != kUnassigned) continue;
    doc.unassigned = std::move(it->children);
    kids.erase(it);
    break;
  }
  std::set<std::string> seen{std::string(kUnassigned)};
  collect_names(doc.root, seen);
  for (const auto& u : doc.unassigned) collect_names(u, seen);
  return doc;
}

std::string serialize_feature_model(const FeatureModelDocument& doc) {
  std::string out;
  emit(doc.root, 0, std::nullopt, out);
  if (!doc.unassigned.empty()) {
    FeatureSpec bucket{std::string(kUnassigned), false, GroupKind::And, doc.unassigned};
    emit(bucket, 1, doc.root.children.empty() ? std::optional<GroupKind>(doc.root.group) : std::nullopt, out);
  }
  return out;
}

FeatureModelDocument extract_feature_model(const FeatureStore& store, ModelId model) {
  const FeatureModel& m = store.model(model);
  FeatureModelDocument doc;
  doc.root = extract_spec(store, m.root);
  for (FeatureId c : store.get(m.unassigned).children) doc.unassigned.push_back(extract_spec(store, c));
  return doc;
}

ModelId instantiate_feature_model(FeatureStore& store, const FeatureModelDocument& doc) {
  const ModelId mid = store.create_model(doc.root.name);
  const FeatureModel m = store.model(mid);
  store.get_mut(m.root).optional = doc.root.optional;
  store.get_mut(m.root).group = doc.root.group;
  instantiate_children(store, m.root, doc.root.children);
  instantiate_children(store, m.unassigned, doc.unassigned);
  return mid;
}

// ---- annotations ---------------------------------------------------------

namespace {

enum class Marker { Begin, End, Line };

struct FoundMarker {
  Marker kind;
  std::vector<std::string> features;
};

std::optional<FoundMarker> find_marker(const std::string& line, std::size_t n) {
  static const std::regex re(R"((//|#|<!--)\s*&(begin|end|line)\[([^\]]*)\])");
  std::smatch m;
  if (!std::regex_search(line, m, re)) return std::nullopt;
  FoundMarker fm;
  const std::string kw = m[2].str();
  fm.kind = kw == "begin" ? Marker::Begin : kw == "end" ? Marker::End : Marker::Line;
  for (const auto& part : split(m[3].str(), ',')) {
    const std::string name(trim(part));
    if (!is_valid_feature_name(name)) {
      fail(ErrorCode::BadFeatureList, at_line(n) + ": bad feature list '[" + m[3].str() + "]'");
    }
    fm.features.push_back(name);
  }
  return fm;
}

std::string list_text(const std::vector<std::string>& features) { return "[" + join(features, ",") + "]"; }

void build_blocks(const std::vector<std::string>& lines, const std::vector<AnnotationSpan>& spans,
                  std::vector<BlockSpec>& out) {
  std::map<std::string, int> used;
  for (const auto& s : spans) {
    BlockSpec b;
    const std::string base = (s.kind == AnnotationSpan::Kind::Block ? "block" : "line") + list_text(s.features);
    const int k = ++used[base];
    b.name = k == 1 ? base : base + "#" + std::to_string(k);
    b.features = s.features;
    for (const auto& f : s.features) b.pc = b.pc.disjoin_feature(f);
    for (std::size_t i = s.start_line; i <= s.end_line && i <= lines.size(); ++i) {
      b.content += lines[i - 1];
      b.content += '\n';
    }
    build_blocks(lines, s.children, b.children);
    out.push_back(std::move(b));
  }
}

}  // namespace

std::vector<AnnotationSpan> parse_annotations(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<AnnotationSpan> top;
  std::vector<AnnotationSpan> open;
  auto place = [&](AnnotationSpan span) {
    if (open.empty()) {
      top.push_back(std::move(span));
    } else {
      open.back().children.push_back(std::move(span));
    }
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t n = i + 1;
    auto m = find_marker(lines[i], n);
    if (!m) continue;
    switch (m->kind) {
      case Marker::Line:
        place(AnnotationSpan{m->features, n, n, AnnotationSpan::Kind::Line, {}});
        break;
      case Marker::Begin:
        open.push_back(AnnotationSpan{m->features, n, 0, AnnotationSpan::Kind::Block, {}});
        break;
      case Marker::End: {
        if (open.empty()) {
          fail(ErrorCode::UnbalancedAnnotation, at_line(n) + ": &end" + list_text(m->features) + " without &begin");
        }
        if (open.back().features != m->features) {
          for (std::size_t k = 0; k + 1 < open.size(); ++k) {
            if (open[k].features == m->features) {
              fail(ErrorCode::OverlapWithoutNesting, at_line(n) + ": &end" + list_text(m->features) +
                                                         " closes an outer span while " +
                                                         list_text(open.back().features) + " is open");
            }
          }
          fail(ErrorCode::MismatchedEnd, at_line(n) + ": &end" + list_text(m->features) + " does not match &begin" +
                                             list_text(open.back().features));
        }
        AnnotationSpan done = std::move(open.back());
        open.pop_back();
        done.end_line = n;
        place(std::move(done));
        break;
      }
    }
  }
  if (!open.empty()) {
    fail(ErrorCode::UnbalancedAnnotation, at_line(open.back().start_line) + ": &begin" +
                                              list_text(open.back().features) + " is never closed");
  }
  return top;
}

std::vector<BlockSpec> build_file_structure(std::string_view text, const std::vector<AnnotationSpan>& spans) {
  std::vector<BlockSpec> out;
  build_blocks(split_lines(text), spans, out);
  return out;
}

std::vector<BlockSpec> build_file_structure(std::string_view text) {
  return build_file_structure(text, parse_annotations(text));
}

// ---- mapping files -------------------------------------------------------

namespace {

std::vector<std::string> parse_feature_list(std::string_view text, std::size_t n) {
  std::vector<std::string> out;
  for (const auto& part : split(text, ',')) {
    const std::string name(trim(part));
    if (!is_valid_feature_name(name)) {
      fail(ErrorCode::BadFeatureList, at_line(n) + ": bad feature list '" + std::string(text) + "'");
    }
    out.push_back(name);
  }
  return out;
}

}  // namespace

MappingDocument parse_mapping_file(std::string_view text, MappingScope scope) {
  MappingDocument doc;
  doc.scope = scope;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t n = i + 1;
    if (trim(lines[i]).empty()) continue;
    if (scope == MappingScope::Folder) {
      doc.entries.push_back(MappingEntry{{}, parse_feature_list(trim(lines[i]), n)});
      continue;
    }
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2 || trim(fields[0]).empty()) {
      fail(ErrorCode::BadMappingRow, at_line(n) + ": expected 'file<TAB>features'");
    }
    doc.entries.push_back(MappingEntry{std::string(trim(fields[0])), parse_feature_list(trim(fields[1]), n)});
  }
  if (doc.entries.empty()) fail(ErrorCode::EmptyDocument, "mapping file has no entries");
  return doc;
}

std::string serialize_mapping_file(const MappingDocument& doc) {
  std::string out;
  for (const auto& e : doc.entries) {
    if (doc.scope == MappingScope::Files) out += e.asset + "\t";
    out += join(e.features, ",") + "\n";
  }
  return out;
}

}  // namespace vplat
