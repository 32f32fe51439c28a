// SPDX-License-Identifier: Apache-2.0
#include "vplat/asset_tree.hpp"

#include <algorithm>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

AssetTree::AssetTree() {
  root_ = AssetId(next_id_++);
  Asset root;
  root.id = root_;
  root.name = "";
  root.type = AssetType::VpRoot;
  root.version = 1;
  assets_.emplace(root_, std::move(root));
}

AssetTree::AssetTree(std::map<AssetId, Asset> assets, AssetId root, std::uint64_t next_id)
    : assets_(std::move(assets)), root_(root), next_id_(next_id) {}

AssetTree AssetTree::from_rows(std::map<AssetId, Asset> assets, AssetId root, std::uint64_t next_id) {
  return AssetTree(std::move(assets), root, next_id);
}

bool AssetTree::attached(AssetId id) const {
  auto it = assets_.find(id);
  while (it != assets_.end()) {
    if (it->first == root_) return true;
    if (!it->second.parent) return false;
    it = assets_.find(*it->second.parent);
  }
  return false;
}

const Asset& AssetTree::get(AssetId id) const {
  auto it = assets_.find(id);
  if (it == assets_.end()) fail(ErrorCode::NotFound, "asset #" + std::to_string(id.value));
  return it->second;
}

Asset& AssetTree::get_mut(AssetId id) {
  auto it = assets_.find(id);
  if (it == assets_.end()) fail(ErrorCode::NotFound, "asset #" + std::to_string(id.value));
  return it->second;
}

AssetId AssetTree::create_detached(std::string name, AssetType type, std::string content) {
  if (type == AssetType::VpRoot) fail(ErrorCode::NotContainable, "only one VpRoot per workspace");
  require_asset_name(name);
  Asset a;
  a.id = AssetId(next_id_++);
  a.name = std::move(name);
  a.type = type;
  a.content = std::move(content);
  const AssetId id = a.id;
  assets_.emplace(id, std::move(a));
  return id;
}

void AssetTree::check_insertable(AssetType type, std::string_view name, AssetId parent,
                                 std::optional<AssetId> ignore) const {
  const Asset& p = get(parent);
  if (!containable(type, p.type)) {
    fail(ErrorCode::NotContainable, std::string(to_string(type)) + " '" + std::string(name) +
                                        "' cannot be contained in " + std::string(to_string(p.type)) +
                                        " '" + path_of(parent).to_string() + "'");
  }
  for (AssetId c : p.children) {
    if (ignore && c == *ignore) continue;
    if (get(c).name == name) {
      fail(ErrorCode::DuplicateName,
           "'" + std::string(name) + "' already exists in '" + path_of(parent).to_string() + "'");
    }
  }
}

void AssetTree::attach(AssetId child, AssetId parent) {
  Asset& c = get_mut(child);
  if (c.parent || child == root_) fail(ErrorCode::InvalidArgument, "asset is already attached");
  if (child == parent || is_ancestor(child, parent)) fail(ErrorCode::CycleDetected, c.name);
  check_insertable(c.type, c.name, parent);
  c.parent = parent;
  get_mut(parent).children.push_back(child);
}

void AssetTree::detach(AssetId id) {
  Asset& a = get_mut(id);
  if (!a.parent) return;
  auto& siblings = get_mut(*a.parent).children;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
  a.parent.reset();
}

void AssetTree::erase_subtree(AssetId id) {
  if (id == root_) fail(ErrorCode::CannotRemoveRoot, "");
  detach(id);
  for (AssetId n : subtree(id)) assets_.erase(n);
}

std::optional<AssetId> AssetTree::find_child(AssetId parent, std::string_view name) const {
  for (AssetId c : get(parent).children) {
    if (get(c).name == name) return c;
  }
  return std::nullopt;
}

std::optional<AssetId> AssetTree::try_resolve(const AssetPath& path) const {
  AssetId cur = root_;
  for (const auto& seg : path.segments) {
    auto next = find_child(cur, seg);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

AssetId AssetTree::resolve(const AssetPath& path) const {
  auto id = try_resolve(path);
  if (!id) fail(ErrorCode::NotFound, "no asset at '" + path.to_string() + "'");
  return *id;
}

AssetPath AssetTree::path_of(AssetId id) const {
  AssetPath path;
  const Asset* a = &get(id);
  while (a->parent) {
    path.segments.push_back(a->name);
    a = &get(*a->parent);
  }
  if (a->id != root_) path.segments.push_back(a->name);  // detached top
  std::reverse(path.segments.begin(), path.segments.end());
  return path;
}

std::vector<AssetId> AssetTree::subtree(AssetId id) const {
  std::vector<AssetId> out;
  std::vector<AssetId> stack{id};
  while (!stack.empty()) {
    AssetId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = get(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<AssetId> AssetTree::ancestors(AssetId id) const {
  std::vector<AssetId> out;
  const Asset* a = &get(id);
  while (a->parent) {
    out.push_back(*a->parent);
    a = &get(*a->parent);
  }
  return out;
}

bool AssetTree::is_ancestor(AssetId ancestor, AssetId descendant) const {
  const auto chain = ancestors(descendant);
  return std::find(chain.begin(), chain.end(), ancestor) != chain.end();
}

std::size_t AssetTree::depth(AssetId id) const { return ancestors(id).size(); }

AssetId AssetTree::copy_node(AssetId source) {
  const Asset& s = get(source);
  Asset c;
  c.id = AssetId(next_id_++);
  c.name = s.name;
  c.type = s.type;
  c.version = s.version;
  c.pc = s.pc;
  c.content = s.content;
  const AssetId id = c.id;
  assets_.emplace(id, std::move(c));
  return id;
}

CloneResult AssetTree::deep_clone(AssetId source) {
  if (get(source).type == AssetType::VpRoot) fail(ErrorCode::CannotCloneRoot, "");
  CloneResult result;
  // Iterative pre-order copy; each frame is (original, parent copy).
  std::vector<std::pair<AssetId, std::optional<AssetId>>> stack{{source, std::nullopt}};
  while (!stack.empty()) {
    auto [orig, parent_copy] = stack.back();
    stack.pop_back();
    AssetId copy = copy_node(orig);
    result.pairs.emplace_back(orig, copy);
    if (parent_copy) {
      get_mut(copy).parent = *parent_copy;
      get_mut(*parent_copy).children.push_back(copy);
    } else {
      result.top = copy;
    }
    const auto& kids = get(orig).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, copy);
  }
  get_mut(result.top).pc = PresenceCondition::constant(true);
  return result;
}

SliceResult AssetTree::get_slice(AssetId asset, AssetId ancestor) {
  if (!is_ancestor(ancestor, asset)) {
    fail(ErrorCode::NotAnAncestor, "'" + path_of(ancestor).to_string() + "' is not an ancestor of '" +
                                       path_of(asset).to_string() + "'");
  }
  std::vector<AssetId> chain;  // containers strictly between ancestor and asset
  for (AssetId a : ancestors(asset)) {
    if (a == ancestor) break;
    chain.push_back(a);
  }
  std::reverse(chain.begin(), chain.end());

  SliceResult slice;
  std::optional<AssetId> parent_copy;
  for (AssetId orig : chain) {
    AssetId copy = copy_node(orig);
    get_mut(copy).pc = PresenceCondition::constant(true);
    slice.containers.emplace_back(orig, copy);
    if (parent_copy) {
      get_mut(copy).parent = *parent_copy;
      get_mut(*parent_copy).children.push_back(copy);
    }
    parent_copy = copy;
  }
  slice.leaf = deep_clone(asset);
  if (parent_copy) {
    get_mut(slice.leaf.top).parent = *parent_copy;
    get_mut(*parent_copy).children.push_back(slice.leaf.top);
    slice.top = slice.containers.front().second;
  } else {
    slice.top = slice.leaf.top;
  }
  return slice;
}

Version AssetTree::bump_global_version(std::span<const AssetId> touched) {
  Asset& r = get_mut(root_);
  const Version v = ++r.version;
  for (AssetId id : touched) get_mut(id).version = v;
  return v;
}

std::optional<AssetId> AssetTree::ancestor_with_model(AssetId id) const {
  const Asset* a = &get(id);
  while (true) {
    if (a->model) return a->id;
    if (!a->parent) return std::nullopt;
    a = &get(*a->parent);
  }
}

ModelId AssetTree::ancestor_feature_model(AssetId id) const {
  auto owner = ancestor_with_model(id);
  if (!owner) fail(ErrorCode::NoFeatureModelInScope, "'" + path_of(id).to_string() + "'");
  return *get(*owner).model;
}

}  // namespace vplat
