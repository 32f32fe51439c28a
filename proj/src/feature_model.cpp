// SPDX-License-Identifier: Apache-2.0
#include "vplat/feature_model.hpp"

#include <algorithm>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::And: return "and";
    case GroupKind::Or: return "or";
    case GroupKind::Xor: return "xor";
  }
  return "and";
}

std::optional<GroupKind> parse_group_kind(std::string_view text) {
  if (text == "and") return GroupKind::And;
  if (text == "or") return GroupKind::Or;
  if (text == "xor") return GroupKind::Xor;
  return std::nullopt;
}

FeaturePath FeaturePath::parse(std::string_view text) {
  FeaturePath path;
  for (auto& seg : split(text, '/')) {
    if (!seg.empty()) path.segments.push_back(std::move(seg));
  }
  return path;
}

std::string FeaturePath::to_string() const { return join(segments, "/"); }

ModelId FeatureStore::create_model(std::string root_name) {
  require_feature_name(root_name);
  if (root_name == kUnassigned) fail(ErrorCode::InvalidName, "root cannot be named UNASSIGNED");
  const ModelId mid(next_model_++);
  Feature root;
  root.id = FeatureId(next_feature_++);
  root.model = mid;
  root.name = std::move(root_name);
  Feature bucket;
  bucket.id = FeatureId(next_feature_++);
  bucket.model = mid;
  bucket.name = std::string(kUnassigned);
  bucket.parent = root.id;
  root.children.push_back(bucket.id);
  models_.emplace(mid, FeatureModel{mid, root.id, bucket.id});
  features_.emplace(root.id, std::move(root));
  features_.emplace(bucket.id, std::move(bucket));
  return mid;
}

void FeatureStore::erase_model(ModelId id) {
  const FeatureModel m = model(id);
  for (FeatureId f : subtree(m.root)) features_.erase(f);
  models_.erase(id);
}

const FeatureModel& FeatureStore::model(ModelId id) const {
  auto it = models_.find(id);
  if (it == models_.end()) fail(ErrorCode::NotFound, "feature model #" + std::to_string(id.value));
  return it->second;
}

const Feature& FeatureStore::get(FeatureId id) const {
  auto it = features_.find(id);
  if (it == features_.end()) fail(ErrorCode::NotFound, "feature #" + std::to_string(id.value));
  return it->second;
}

Feature& FeatureStore::get_mut(FeatureId id) {
  auto it = features_.find(id);
  if (it == features_.end()) fail(ErrorCode::NotFound, "feature #" + std::to_string(id.value));
  return it->second;
}

std::optional<FeatureId> FeatureStore::find(ModelId mid, std::string_view name) const {
  for (FeatureId f : subtree(model(mid).root)) {
    if (get(f).name == name) return f;
  }
  return std::nullopt;
}

std::optional<FeatureId> FeatureStore::try_resolve(ModelId mid, const FeaturePath& path) const {
  const FeatureModel& m = model(mid);
  const auto& segs = path.segments;
  std::size_t i = 0;
  if (!segs.empty() && segs[0] == get(m.root).name) i = 1;
  FeatureId cur = m.root;
  for (; i < segs.size(); ++i) {
    std::optional<FeatureId> next;
    for (FeatureId c : get(cur).children) {
      if (get(c).name == segs[i]) next = c;
    }
    if (!next) {
      if (segs.size() == 1) return find(mid, segs[0]);
      return std::nullopt;
    }
    cur = *next;
  }
  return cur;
}

FeatureId FeatureStore::resolve(ModelId mid, const FeaturePath& path) const {
  auto id = try_resolve(mid, path);
  if (!id) fail(ErrorCode::NotFound, "no feature at '" + path.to_string() + "'");
  return *id;
}

FeaturePath FeatureStore::path_of(FeatureId id) const {
  FeaturePath path;
  const Feature* f = &get(id);
  while (true) {
    path.segments.push_back(f->name);
    if (!f->parent) break;
    f = &get(*f->parent);
  }
  std::reverse(path.segments.begin(), path.segments.end());
  return path;
}

FeatureId FeatureStore::create_feature(std::string name, FeatureId parent) {
  require_feature_name(name);
  const ModelId mid = get(parent).model;
  if (find(mid, name)) {
    fail(ErrorCode::DuplicateFeatureName,
         "'" + name + "' already exists in feature model '" + get(model(mid).root).name + "'");
  }
  Feature f;
  f.id = FeatureId(next_feature_++);
  f.model = mid;
  f.name = std::move(name);
  f.parent = parent;
  const FeatureId id = f.id;
  features_.emplace(id, std::move(f));
  get_mut(parent).children.push_back(id);
  return id;
}

void FeatureStore::reparent(FeatureId id, FeatureId new_parent) {
  if (id == new_parent || is_ancestor(id, new_parent)) {
    fail(ErrorCode::CycleDetected, "cannot move '" + get(id).name + "' below itself");
  }
  Feature& f = get_mut(id);
  if (f.parent) {
    auto& siblings = get_mut(*f.parent).children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
  }
  f.parent = new_parent;
  get_mut(new_parent).children.push_back(id);
}

void FeatureStore::erase_subtree(FeatureId id) {
  const auto doomed = subtree(id);
  Feature& f = get_mut(id);
  if (f.parent) {
    auto& siblings = get_mut(*f.parent).children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
  }
  for (FeatureId d : doomed) features_.erase(d);
}

std::vector<FeatureId> FeatureStore::subtree(FeatureId id) const {
  std::vector<FeatureId> out;
  std::vector<FeatureId> stack{id};
  while (!stack.empty()) {
    FeatureId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = get(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool FeatureStore::is_ancestor(FeatureId ancestor, FeatureId descendant) const {
  const Feature* f = &get(descendant);
  while (f->parent) {
    if (*f->parent == ancestor) return true;
    f = &get(*f->parent);
  }
  return false;
}

bool FeatureStore::is_unassigned(FeatureId id) const {
  return model(get(id).model).unassigned == id;
}

Version FeatureStore::bump_model_version(ModelId mid, std::span<const FeatureId> touched) {
  Feature& root = get_mut(model(mid).root);
  const Version v = ++root.version;
  for (FeatureId f : touched) get_mut(f).version = v;
  return v;
}

bool FeatureStore::detect_changes(FeatureId id, Version since) const {
  for (FeatureId f : subtree(id)) {
    if (get(f).version > since) return true;
  }
  return false;
}

FeatureStore FeatureStore::from_rows(std::map<ModelId, FeatureModel> models,
                                     std::map<FeatureId, Feature> features,
                                     std::uint64_t next_model, std::uint64_t next_feature) {
  FeatureStore s;
  s.models_ = std::move(models);
  s.features_ = std::move(features);
  s.next_model_ = next_model;
  s.next_feature_ = next_feature;
  return s;
}

}  // namespace vplat
