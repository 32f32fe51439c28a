// SPDX-License-Identifier: Apache-2.0
#include "vplat/sync.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vplat/annotations.hpp"
#include "vplat/asset_ops.hpp"
#include "vplat/error.hpp"
#include "vplat/feature_ops.hpp"
#include "vplat/names.hpp"
#include "vplat/persistence.hpp"

namespace vplat {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kIgnoreFile = ".vpignore";

std::string basename_of(std::string_view rel) {
  const auto slash = rel.rfind('/');
  return std::string(slash == std::string_view::npos ? rel : rel.substr(slash + 1));
}

std::string dirname_of(std::string_view rel) {
  const auto slash = rel.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(rel.substr(0, slash));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoFailure, "cannot read " + p.string());
  return buf.str();
}

bool ignored(const std::vector<std::string>& patterns, const std::string& rel) {
  const std::string base = basename_of(rel);
  for (const auto& p : patterns) {
    if (fnmatch(p.c_str(), rel.c_str(), 0) == 0 || fnmatch(p.c_str(), base.c_str(), 0) == 0) return true;
  }
  return false;
}

// Asset path for a path relative to the bound directory.
std::string to_asset_path(const Workspace& ws, const std::string& rel) {
  if (ws.layout == Layout::MultiRepo) return rel;
  return rel.empty() ? ws.repo_name : ws.repo_name + "/" + rel;
}

std::optional<AssetId> find_rel(const Workspace& ws, const std::string& rel) {
  return ws.tree.try_resolve(AssetPath::parse(to_asset_path(ws, rel)));
}

AssetId ensure_dir(Workspace& ws, const std::string& rel) {
  AssetId cur = ws.tree.root();
  std::vector<std::string> segs;
  if (ws.layout == Layout::SingleRepo) segs.push_back(ws.repo_name);
  if (!rel.empty()) {
    for (auto& s : split(rel, '/')) segs.push_back(std::move(s));
  }
  for (const auto& seg : segs) {
    if (auto next = ws.tree.find_child(cur, seg)) {
      cur = *next;
      continue;
    }
    const AssetType type = cur == ws.tree.root() ? AssetType::Repository : AssetType::Folder;
    const AssetId created = ws.tree.create_detached(seg, type);
    ops::add_asset(ws, created, cur);
    cur = created;
  }
  return cur;
}

AssetId build_block(Workspace& ws, const BlockSpec& spec) {
  const AssetId id = ws.tree.create_detached(spec.name, AssetType::Block, spec.content);
  for (const auto& child : spec.children) {
    const AssetId c = build_block(ws, child);
    ws.tree.attach(c, id);
  }
  return id;
}

void map_blocks(Workspace& ws, AssetId block, const BlockSpec& spec) {
  for (const auto& f : spec.features) {
    if (!ws.tree.get(block).pc.mentions(f)) ops::map_asset_to_feature(ws, block, f);
  }
  for (const auto& child : spec.children) {
    map_blocks(ws, *ws.tree.find_child(block, child.name), child);
  }
}

void add_block(Workspace& ws, AssetId parent, const BlockSpec& spec) {
  const AssetId b = build_block(ws, spec);
  ops::add_asset(ws, b, parent);
  map_blocks(ws, b, spec);
}

void reconcile_blocks(Workspace& ws, AssetId parent, const std::vector<BlockSpec>& specs) {
  std::set<std::string> wanted;
  for (const auto& spec : specs) {
    wanted.insert(spec.name);
    auto existing = ws.tree.find_child(parent, spec.name);
    if (!existing || ws.tree.get(*existing).type != AssetType::Block) {
      add_block(ws, parent, spec);
      continue;
    }
    if (ws.tree.get(*existing).content != spec.content) ops::change_asset(ws, *existing, spec.content);
    for (const auto& f : spec.features) {
      if (!ws.tree.get(*existing).pc.mentions(f)) ops::map_asset_to_feature(ws, *existing, f);
    }
    reconcile_blocks(ws, *existing, spec.children);
  }
  const std::vector<AssetId> kids = ws.tree.get(parent).children;
  for (AssetId k : kids) {
    const Asset& a = ws.tree.get(k);
    if (a.type == AssetType::Block && !wanted.count(a.name)) ops::remove_asset(ws, k);
  }
}

void add_file(Workspace& ws, const std::string& rel, const std::string& content) {
  const auto specs = build_file_structure(content);
  const AssetId parent = ensure_dir(ws, dirname_of(rel));
  const AssetId file = ws.tree.create_detached(basename_of(rel), AssetType::File, content);
  for (const auto& spec : specs) ws.tree.attach(build_block(ws, spec), file);
  ops::add_asset(ws, file, parent);
  for (const auto& spec : specs) map_blocks(ws, *ws.tree.find_child(file, spec.name), spec);
}

AssetId require_rel(const Workspace& ws, const std::string& rel) {
  auto id = find_rel(ws, rel);
  if (!id) fail(ErrorCode::NotFound, "no asset for '" + rel + "'");
  return *id;
}

void rename_file(Workspace& ws, const std::string& from, const std::string& to) {
  AssetId asset = require_rel(ws, from);
  const std::string new_dir = dirname_of(to);
  const std::string new_name = basename_of(to);
  if (dirname_of(from) != new_dir) {
    const AssetId parent = ensure_dir(ws, new_dir);
    const std::string old_name = ws.tree.get(asset).name;
    if (ws.tree.find_child(parent, old_name)) {
      fail(ErrorCode::DuplicateName, "'" + new_dir + "/" + old_name + "' already exists");
    }
    ops::move_asset(ws, asset, parent);
    asset = *ws.tree.find_child(parent, old_name);
  }
  if (ws.tree.get(asset).name != new_name) ops::change_asset(ws, asset, std::nullopt, new_name);
}

// ---- feature-model files -------------------------------------------------

void collect_declared(const FeatureSpec& spec, std::set<std::string>& out) {
  out.insert(spec.name);
  for (const auto& c : spec.children) collect_declared(c, out);
}

void sync_declared(Workspace& ws, ModelId mid, FeatureId parent, const FeatureSpec& spec) {
  if (ws.features.get(parent).group != spec.group && !spec.children.empty()) {
    ws.features.get_mut(parent).group = spec.group;
  }
  for (const auto& child : spec.children) {
    FeatureId id;
    if (auto existing = ws.features.find(mid, child.name)) {
      id = *existing;
      if (ws.features.get(id).parent != parent) ops::move_feature(ws, id, parent);
    } else {
      id = ops::add_feature(ws, child.name, parent);
    }
    if (child.optional && !ws.features.get(id).optional) ops::make_feature_optional(ws, id);
    sync_declared(ws, mid, id, child);
  }
}

bool subtree_mapped(const Workspace& ws, FeatureId f) {
  for (FeatureId g : ws.features.subtree(f)) {
    if (!ws.mapped_assets(g).empty()) return true;
  }
  return false;
}

void sync_model(Workspace& ws, ModelId mid, const FeatureModelDocument& doc) {
  const FeatureModel m = ws.features.model(mid);
  if (ws.features.get(m.root).name != doc.root.name) ops::rename_feature(ws, m.root, doc.root.name);
  if (doc.root.optional && !ws.features.get(m.root).optional) ops::make_feature_optional(ws, m.root);
  sync_declared(ws, mid, m.root, doc.root);
  for (const auto& u : doc.unassigned) {
    FeatureId id;
    if (auto existing = ws.features.find(mid, u.name)) {
      id = *existing;
    } else {
      id = ops::add_feature(ws, u.name, m.unassigned);
    }
    sync_declared(ws, mid, id, u);
  }

  std::set<std::string> declared;
  collect_declared(doc.root, declared);
  for (const auto& u : doc.unassigned) collect_declared(u, declared);
  const std::set<FeatureId> bucket = [&] {
    auto v = ws.features.subtree(m.unassigned);
    return std::set<FeatureId>(v.begin(), v.end());
  }();
  for (FeatureId f : ws.features.subtree(m.root)) {
    if (!ws.features.exists(f) || f == m.root || bucket.count(f)) continue;
    if (declared.count(ws.features.get(f).name)) continue;
    if (subtree_mapped(ws, f)) {
      ops::move_feature(ws, f, m.unassigned);
    } else {
      ops::remove_feature(ws, f);
    }
  }
}

void apply_feature_model_file(Workspace& ws, const ChangeEntry& e) {
  if (e.status == ChangeEntry::Status::D) {
    ws.feature_files.erase(e.path);
    return;
  }
  const auto doc = parse_feature_model_file(e.content);
  const AssetId owner = ensure_dir(ws, dirname_of(e.path));
  if (auto mid = ws.tree.get(owner).model) {
    sync_model(ws, *mid, doc);
  } else {
    ops::add_feature_model_from_text(ws, owner, e.content);
  }
  ws.feature_files[e.path] = e.content;
}

// ---- mapping files -------------------------------------------------------

using MappingPairs = std::vector<std::pair<std::string, std::string>>;  // (asset name, feature)

MappingPairs mapping_pairs(const std::string& text, MappingScope scope) {
  MappingPairs out;
  for (const auto& entry : parse_mapping_file(text, scope).entries) {
    for (const auto& f : entry.features) {
      std::pair<std::string, std::string> p{entry.asset, f};
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
  }
  return out;
}

void apply_mapping_file(Workspace& ws, const ChangeEntry& e, MappingScope scope) {
  MappingPairs before;
  if (auto it = ws.feature_files.find(e.path); it != ws.feature_files.end()) {
    try {
      before = mapping_pairs(it->second, scope);
    } catch (const Error&) {
      before.clear();
    }
  }
  MappingPairs after;
  if (e.status != ChangeEntry::Status::D) after = mapping_pairs(e.content, scope);

  const std::string dir = dirname_of(e.path);
  auto target_of = [&](const std::string& name, bool must_exist) -> std::optional<AssetId> {
    auto folder = find_rel(ws, dir);
    if (!folder) {
      if (!must_exist) return std::nullopt;
      folder = ensure_dir(ws, dir);
    }
    if (scope == MappingScope::Folder) return folder;
    auto file = ws.tree.find_child(*folder, name);
    if (!file && must_exist) {
      fail(ErrorCode::UnknownFile, "'" + e.path + "' names '" + name + "', which is not in '" + dir + "'");
    }
    return file;
  };

  for (const auto& p : after) {
    if (std::find(before.begin(), before.end(), p) != before.end()) continue;
    const AssetId a = *target_of(p.first, true);
    if (!ws.tree.get(a).pc.mentions(p.second)) ops::map_asset_to_feature(ws, a, p.second);
  }
  for (const auto& p : before) {
    if (std::find(after.begin(), after.end(), p) != after.end()) continue;
    if (auto a = target_of(p.first, false)) ops::unmap_asset_from_feature(ws, *a, p.second);
  }
  if (e.status == ChangeEntry::Status::D) {
    ws.feature_files.erase(e.path);
  } else {
    ws.feature_files[e.path] = e.content;
  }
}

bool by_path(const ChangeEntry& a, const ChangeEntry& b) { return a.path < b.path; }

}  // namespace

FileRole file_role(std::string_view relative_path) {
  const std::string base = basename_of(relative_path);
  if (base == kFolderMappingFile) return FileRole::FolderMapping;
  if (base == kFilesMappingFile) return FileRole::FilesMapping;
  if (base.size() >= kFeatureModelExt.size() &&
      base.compare(base.size() - kFeatureModelExt.size(), kFeatureModelExt.size(), kFeatureModelExt) == 0) {
    return FileRole::FeatureModel;
  }
  return FileRole::Asset;
}

char status_letter(ChangeEntry::Status status) {
  switch (status) {
    case ChangeEntry::Status::A: return 'A';
    case ChangeEntry::Status::M: return 'M';
    case ChangeEntry::Status::D: return 'D';
    case ChangeEntry::Status::R: return 'R';
  }
  return '?';
}

DirSnapshot read_directory(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorCode::IoFailure, root.string() + " is not a directory");
  std::vector<std::string> patterns;
  if (fs::is_regular_file(root / kIgnoreFile)) {
    for (const auto& line : split_lines(read_file(root / kIgnoreFile))) {
      const std::string p(trim(line));
      if (!p.empty() && p[0] != '#') patterns.push_back(p);
    }
  }
  DirSnapshot snap;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) fail(ErrorCode::IoFailure, root.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) fail(ErrorCode::IoFailure, it->path().string() + ": " + ec.message());
    const std::string rel = fs::relative(it->path(), root).generic_string();
    const bool is_dir = it->is_directory(ec) && !it->is_symlink(ec);
    if ((it.depth() == 0 && (rel == kStateDir || rel == kIgnoreFile)) || ignored(patterns, rel)) {
      if (is_dir) it.disable_recursion_pending();
      continue;
    }
    if (is_dir) {
      snap.dirs.insert(rel);
    } else if (it->is_regular_file(ec) && !it->is_symlink(ec)) {
      snap.files[rel] = read_file(it->path());
    }
  }
  return snap;
}

DirSnapshot snapshot_of(const Workspace& ws) {
  DirSnapshot snap;
  const std::string prefix = ws.layout == Layout::SingleRepo ? ws.repo_name : "";
  for (AssetId id : ws.tree.subtree(ws.tree.root())) {
    const Asset& a = ws.tree.get(id);
    if (a.type != AssetType::Repository && a.type != AssetType::Folder && a.type != AssetType::File) continue;
    std::string path = ws.asset_path(id);
    std::string rel;
    if (prefix.empty()) {
      rel = path;
    } else if (path == prefix) {
      continue;
    } else if (path.rfind(prefix + "/", 0) == 0) {
      rel = path.substr(prefix.size() + 1);
    } else {
      continue;
    }
    if (a.type == AssetType::File) {
      snap.files[rel] = a.content;
    } else {
      snap.dirs.insert(rel);
    }
  }
  for (const auto& [path, content] : ws.feature_files) snap.files[path] = content;
  return snap;
}

Layout detect_layout(const DirSnapshot& snapshot) {
  bool top_dir = false;
  for (const auto& d : snapshot.dirs) {
    if (d.find('/') == std::string::npos) top_dir = true;
  }
  for (const auto& [path, content] : snapshot.files) {
    if (path.find('/') == std::string::npos && file_role(path) == FileRole::Asset) return Layout::SingleRepo;
  }
  return top_dir ? Layout::MultiRepo : Layout::SingleRepo;
}

ChangeSet diff_snapshots(const DirSnapshot& old_snapshot, const DirSnapshot& new_snapshot) {
  std::vector<ChangeEntry> added, deleted, entries;
  for (const auto& [path, content] : old_snapshot.files) {
    auto it = new_snapshot.files.find(path);
    if (it == new_snapshot.files.end()) {
      deleted.push_back(ChangeEntry{ChangeEntry::Status::D, path, {}, {}, false});
    } else if (it->second != content) {
      entries.push_back(ChangeEntry{ChangeEntry::Status::M, path, {}, it->second, false});
    }
  }
  for (const auto& [path, content] : new_snapshot.files) {
    if (!old_snapshot.files.count(path)) added.push_back(ChangeEntry{ChangeEntry::Status::A, path, {}, content, false});
  }

  // Pair deletions with additions of identical bytes, when unambiguous.
  std::map<std::string, std::vector<std::size_t>> del_by_content, add_by_content;
  for (std::size_t i = 0; i < deleted.size(); ++i) {
    if (file_role(deleted[i].path) == FileRole::Asset) {
      del_by_content[old_snapshot.files.at(deleted[i].path)].push_back(i);
    }
  }
  for (std::size_t i = 0; i < added.size(); ++i) {
    if (file_role(added[i].path) == FileRole::Asset) add_by_content[added[i].content].push_back(i);
  }
  std::set<std::size_t> del_used, add_used;
  for (const auto& [content, dels] : del_by_content) {
    auto it = add_by_content.find(content);
    if (dels.size() != 1 || it == add_by_content.end() || it->second.size() != 1) continue;
    const std::size_t d = dels[0], a = it->second[0];
    entries.push_back(ChangeEntry{ChangeEntry::Status::R, deleted[d].path, added[a].path, content, false});
    del_used.insert(d);
    add_used.insert(a);
  }
  for (std::size_t i = 0; i < deleted.size(); ++i) {
    if (!del_used.count(i)) entries.push_back(deleted[i]);
  }
  for (std::size_t i = 0; i < added.size(); ++i) {
    if (!add_used.count(i)) entries.push_back(added[i]);
  }

  for (const auto& d : new_snapshot.dirs) {
    if (!old_snapshot.dirs.count(d)) entries.push_back(ChangeEntry{ChangeEntry::Status::A, d, {}, {}, true});
  }
  for (const auto& d : old_snapshot.dirs) {
    if (!new_snapshot.dirs.count(d)) entries.push_back(ChangeEntry{ChangeEntry::Status::D, d, {}, {}, true});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const ChangeEntry& a, const ChangeEntry& b) {
    if (a.path != b.path) return a.path < b.path;
    return a.directory > b.directory;
  });
  return ChangeSet{std::move(entries)};
}

ChangeSet diff_snapshots(const Workspace& old_ws, const fs::path& new_dir) {
  return diff_snapshots(snapshot_of(old_ws), read_directory(new_dir));
}

std::vector<OperatorApplication> apply_change_set(Workspace& ws, const ChangeSet& cs, const ApplyHooks& hooks) {
  return ws.transact([&] {
    const std::size_t start = ws.log.size();
    const bool outer_mode = ws.derived_mode;
    ws.derived_mode = true;

    // Renames whose ends play different roles are a deletion plus an addition.
    std::vector<ChangeEntry> entries;
    for (const auto& e : cs.entries) {
      if (e.status == ChangeEntry::Status::R &&
          (file_role(e.path) != FileRole::Asset || file_role(e.new_path) != FileRole::Asset)) {
        entries.push_back(ChangeEntry{ChangeEntry::Status::D, e.path, {}, {}, false});
        entries.push_back(ChangeEntry{ChangeEntry::Status::A, e.new_path, {}, e.content, false});
      } else {
        entries.push_back(e);
      }
    }

    std::vector<ChangeEntry> models, dir_adds, files, dir_dels, mappings;
    for (const auto& e : entries) {
      if (e.directory) {
        (e.status == ChangeEntry::Status::D ? dir_dels : dir_adds).push_back(e);
        continue;
      }
      switch (file_role(e.path)) {
        case FileRole::FeatureModel: models.push_back(e); break;
        case FileRole::FolderMapping:
        case FileRole::FilesMapping: mappings.push_back(e); break;
        case FileRole::Asset: files.push_back(e); break;
      }
    }
    for (auto* group : {&models, &dir_adds, &files, &mappings}) std::stable_sort(group->begin(), group->end(), by_path);
    std::sort(dir_dels.begin(), dir_dels.end(), [](const auto& a, const auto& b) { return a.path > b.path; });

    // 1. feature-model files
    if (ws.layout == Layout::SingleRepo && !ws.repo_name.empty()) ensure_dir(ws, "");
    for (const auto& e : models) {
      if (e.status != ChangeEntry::Status::D) apply_feature_model_file(ws, e);
    }
    for (const auto& e : models) {
      if (e.status == ChangeEntry::Status::D) apply_feature_model_file(ws, e);
    }

    // 2. asset files and directories
    for (const auto& e : dir_adds) ensure_dir(ws, e.path);
    for (const auto& e : files) {
      switch (e.status) {
        case ChangeEntry::Status::A: add_file(ws, e.path, e.content); break;
        case ChangeEntry::Status::M: {
          const AssetId a = require_rel(ws, e.path);
          const auto specs = build_file_structure(e.content);
          ops::change_asset(ws, a, e.content);
          reconcile_blocks(ws, a, specs);
          break;
        }
        case ChangeEntry::Status::D:
          if (auto a = find_rel(ws, e.path)) ops::remove_asset(ws, *a);
          break;
        case ChangeEntry::Status::R: rename_file(ws, e.path, e.new_path); break;
      }
    }
    for (const auto& e : dir_dels) {
      if (auto a = find_rel(ws, e.path); a && *a != ws.tree.root()) ops::remove_asset(ws, *a);
    }

    // 3. mapping files
    for (const auto& e : mappings) {
      apply_mapping_file(ws, e, file_role(e.path) == FileRole::FolderMapping ? MappingScope::Folder
                                                                             : MappingScope::Files);
    }

    // 4. and 5.
    if (hooks.clone_directives) hooks.clone_directives(ws);
    if (hooks.propagations) hooks.propagations(ws);

    ws.derived_mode = outer_mode;
    return std::vector<OperatorApplication>(ws.log.begin() + static_cast<long>(start), ws.log.end());
  });
}

void apply_to_directory(const fs::path& root, const ChangeSet& cs) {
  std::error_code ec;
  auto write = [&](const std::string& rel, const std::string& bytes) {
    const fs::path p = root / rel;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) fail(ErrorCode::IoFailure, "cannot write " + p.string());
  };
  for (const auto& e : cs.entries) {
    if (e.directory && e.status == ChangeEntry::Status::A) fs::create_directories(root / e.path, ec);
  }
  for (const auto& e : cs.entries) {
    if (e.directory) continue;
    switch (e.status) {
      case ChangeEntry::Status::A:
      case ChangeEntry::Status::M: write(e.path, e.content); break;
      case ChangeEntry::Status::D: fs::remove(root / e.path, ec); break;
      case ChangeEntry::Status::R:
        fs::remove(root / e.path, ec);
        write(e.new_path, e.content);
        break;
    }
  }
  std::vector<std::string> dels;
  for (const auto& e : cs.entries) {
    if (e.directory && e.status == ChangeEntry::Status::D) dels.push_back(e.path);
  }
  std::sort(dels.rbegin(), dels.rend());
  for (const auto& d : dels) {
    if (fs::is_directory(root / d, ec) && fs::is_empty(root / d, ec)) fs::remove(root / d, ec);
  }
}

Workspace scan(const fs::path& root) {
  const DirSnapshot snap = read_directory(root);
  Workspace ws;
  ws.layout = detect_layout(snap);
  if (ws.layout == Layout::SingleRepo) {
    std::error_code ec;
    fs::path canon = fs::weakly_canonical(root, ec);
    std::string name = (ec ? root : canon).filename().string();
    if (name.empty()) name = (ec ? root : canon).parent_path().filename().string();
    ws.repo_name = is_valid_asset_name(name) ? name : "repo";
  }
  apply_change_set(ws, diff_snapshots(DirSnapshot{}, snap));
  return ws;
}

}  // namespace vplat
