// SPDX-License-Identifier: Apache-2.0
#include "vplat/feature_ops.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ops_internal.hpp"
#include "vplat/annotations.hpp"
#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat::detail {

namespace {

AssetId owner_of(const Workspace& ws, ModelId model) {
  auto owner = ws.model_owner(model);
  if (!owner) fail(ErrorCode::NoFeatureModelInScope, "feature model #" + std::to_string(model.value) + " is detached");
  return *owner;
}

void require_feature(const Workspace& ws, FeatureId id) {
  if (!ws.features.exists(id)) fail(ErrorCode::NotFound, "feature #" + std::to_string(id.value));
}

// Ensures a traced clone of `asset` (owned by `source_owner`) exists below
// `target_owner`, copying the container chain as a slice. Existing traced
// containers are reused first, then same-named ones of the same type.
AssetId ensure_clone_in_scope(Workspace& ws, AssetId asset, AssetId source_owner, AssetId target_owner,
                              bool adopt) {
  if (auto c = clone_in_scope(ws, asset, target_owner)) return *c;
  if (asset == source_owner) {
    fail(ErrorCode::NotContainable, "'" + ws.asset_path(asset) + "' owns the feature model and cannot be sliced");
  }
  std::vector<AssetId> chain;
  for (AssetId a : ws.tree.ancestors(asset)) {
    if (a == source_owner) break;
    chain.push_back(a);
  }
  std::reverse(chain.begin(), chain.end());

  AssetId cur = target_owner;
  std::optional<AssetId> insertion_point;
  for (AssetId container : chain) {
    const Asset c = ws.tree.get(container);
    std::optional<AssetId> next;
    std::uint64_t best = 0;
    for (AssetId k : ws.tree.get(cur).children) {
      auto t = ws.traces.latest_trace(container, k);
      if (t && t->seq > best) {
        best = t->seq;
        next = k;
      }
    }
    if (!next) {
      if (auto same = ws.tree.find_child(cur, c.name); same && ws.tree.get(*same).type == c.type) {
        ws.traces.add_asset_trace(container, *same, c.version);
        next = *same;
      }
    }
    if (!next) {
      ws.tree.check_insertable(c.type, c.name, cur);
      const AssetId copy = ws.tree.create_detached(c.name, c.type, c.content);
      ws.tree.get_mut(copy).version = c.version;
      ws.tree.attach(copy, cur);
      ws.traces.add_asset_trace(container, copy, c.version);
      if (!insertion_point) insertion_point = cur;
      next = copy;
    }
    cur = *next;
  }

  const Asset leaf = ws.tree.get(asset);
  if (auto existing = ws.tree.find_child(cur, leaf.name)) {
    if (!adopt || ws.tree.get(*existing).type != leaf.type) {
      fail(ErrorCode::DuplicateName, "'" + ws.asset_path(*existing) + "' already exists");
    }
    ws.traces.add_asset_trace(asset, *existing, leaf.version);
    if (insertion_point) {
      const AssetId stamp[] = {*insertion_point};
      ws.tree.bump_global_version(stamp);
    }
    return *existing;
  }
  CloneResult cr = clone_into(ws, asset, cur, false);
  const AssetId stamp[] = {insertion_point.value_or(cur)};
  ws.tree.bump_global_version(stamp);
  return cr.top;
}

void ensure_mapping(Workspace& ws, AssetId asset, const std::string& feature) {
  if (ws.tree.get(asset).pc.mentions(feature)) return;
  Asset& a = ws.tree.get_mut(asset);
  a.pc = a.pc.disjoin_feature(feature);
  const AssetId stamp[] = {asset};
  ws.tree.bump_global_version(stamp);
}

// The clone of `source` located in the subtree of `target_parent`.
std::optional<FeatureId> clone_below(const Workspace& ws, FeatureId source, FeatureId target_parent) {
  for (FeatureId f : ws.features.subtree(target_parent)) {
    if (f != target_parent && ws.traces.is_clone(source, f)) return f;
  }
  return std::nullopt;
}

std::vector<FeatureId> proper_children(const Workspace& ws, FeatureId f) {
  std::vector<FeatureId> out;
  for (FeatureId c : ws.features.get(f).children) {
    if (!ws.features.is_unassigned(c)) out.push_back(c);
  }
  return out;
}

bool needs_propagation(const Workspace& ws, FeatureId source, FeatureId target) {
  const auto tr = ws.traces.latest_trace(source, target);
  if (!tr) return false;
  if (ws.features.detect_changes(source, tr->version_at)) return true;
  const auto target_owner = ws.model_owner(ws.features.get(target).model);
  if (!target_owner) return false;
  const std::string& tname = ws.features.get(target).name;
  for (AssetId a : ws.mapped_assets(source)) {
    auto c = clone_in_scope(ws, a, *target_owner);
    if (!c) return true;
    if (ws.tree.get(a).version > ws.traces.latest_trace(a, *c)->version_at) return true;
    if (!ws.tree.get(*c).pc.mentions(tname)) return true;
  }
  for (FeatureId s : proper_children(ws, source)) {
    auto sc = clone_below(ws, s, target);
    if (!sc || needs_propagation(ws, s, *sc)) return true;
  }
  return false;
}

FeatureId clone_feature_impl(Workspace& ws, FeatureId source, FeatureId target_parent, bool adopt) {
  const ModelId ms = ws.features.get(source).model;
  const ModelId mt = ws.features.get(target_parent).model;
  const AssetId source_owner = owner_of(ws, ms);
  const AssetId target_owner = owner_of(ws, mt);
  const Version at = ws.features.model_version(ms);

  std::vector<FeatureId> feats;
  for (FeatureId f : ws.features.subtree(source)) {
    bool in_bucket = false;
    for (FeatureId g = f;; g = *ws.features.get(g).parent) {
      if (ws.features.is_unassigned(g)) {
        in_bucket = true;
        break;
      }
      if (g == source || !ws.features.get(g).parent) break;
    }
    if (!in_bucket) feats.push_back(f);
  }
  if (!adopt) {
    for (FeatureId f : feats) {
      if (ws.features.find(mt, ws.features.get(f).name)) {
        fail(ErrorCode::DuplicateFeatureName, "'" + ws.features.get(f).name + "' already exists in the target model");
      }
    }
  }

  std::map<FeatureId, FeatureId> clone_of;
  for (FeatureId f : feats) {
    const Feature src = ws.features.get(f);
    const FeatureId parent_clone = f == source ? target_parent : clone_of.at(*src.parent);
    FeatureId c;
    std::vector<FeatureId> touched;
    if (auto existing = adopt ? ws.features.find(mt, src.name) : std::nullopt) {
      c = *existing;
      touched = {c};
    } else {
      c = ws.features.create_feature(src.name, parent_clone);
      Feature& dst = ws.features.get_mut(c);
      dst.optional = src.optional;
      dst.group = src.group;
      touched = {c, parent_clone};
    }
    ws.traces.add_feature_trace(f, c, at);
    ws.features.bump_model_version(mt, touched);
    clone_of.emplace(f, c);
  }

  for (FeatureId f : feats) {
    const std::string fname = ws.features.get(clone_of.at(f)).name;
    for (AssetId a : ws.mapped_assets(f)) {
      const AssetId c = ensure_clone_in_scope(ws, a, source_owner, target_owner, adopt);
      ensure_mapping(ws, c, fname);
    }
  }
  return clone_of.at(source);
}

void propagate_feature_impl(Workspace& ws, FeatureId source, FeatureId target) {
  const ModelId ms = ws.features.get(source).model;
  const ModelId mt = ws.features.get(target).model;
  const AssetId source_owner = owner_of(ws, ms);
  const AssetId target_owner = owner_of(ws, mt);

  const Feature src = ws.features.get(source);
  if (ws.features.get(target).name != src.name) rename_feature(ws, target, src.name);
  Feature& dst = ws.features.get_mut(target);
  dst.optional = src.optional;
  dst.group = src.group;

  const std::string tname = src.name;
  for (AssetId a : ws.mapped_assets(source)) {
    AssetId c;
    if (auto existing = clone_in_scope(ws, a, target_owner)) {
      c = *existing;
      if (ws.tree.get(a).version > ws.traces.latest_trace(a, c)->version_at) propagate_asset(ws, a, c);
    } else {
      c = ensure_clone_in_scope(ws, a, source_owner, target_owner, false);
    }
    ensure_mapping(ws, c, tname);
  }
  ws.traces.add_feature_trace(source, target, ws.features.model_version(ms));
  const FeatureId stamp[] = {target};
  ws.features.bump_model_version(mt, stamp);

  for (FeatureId s : proper_children(ws, source)) {
    if (auto sc = clone_below(ws, s, target)) {
      if (needs_propagation(ws, s, *sc)) propagate_feature_impl(ws, s, *sc);
    } else {
      clone_feature_impl(ws, s, target, false);
    }
  }
}

}  // namespace

FeatureId add_feature(Workspace& ws, std::string name, FeatureId parent) {
  require_feature_name(name);
  require_feature(ws, parent);
  const ModelId mid = ws.features.get(parent).model;
  const FeatureId f[] = {ws.features.create_feature(std::move(name), parent)};
  ws.features.bump_model_version(mid, f);
  return f[0];
}

bool add_feature_model(Workspace& ws, AssetId asset, ModelId model) {
  require_attached(ws, asset);
  if (ws.tree.get(asset).model) {
    fail(ErrorCode::FeatureModelAlreadyPresent, "'" + ws.asset_path(asset) + "' already has a feature model");
  }
  if (!ws.features.has_model(model)) fail(ErrorCode::NotFound, "feature model #" + std::to_string(model.value));
  if (ws.model_owner(model)) fail(ErrorCode::InvalidArgument, "feature model is already attached");
  ws.tree.get_mut(asset).model = model;
  std::vector<FeatureId> created;
  for (AssetId a : ws.assets_in_scope(model)) {
    for (const auto& lit : ws.tree.get(a).pc.literals()) {
      if (ws.features.find(model, lit)) continue;
      created.push_back(ws.features.create_feature(lit, ws.features.model(model).unassigned));
    }
  }
  if (!created.empty()) ws.features.bump_model_version(model, created);
  const AssetId stamp[] = {asset};
  ws.tree.bump_global_version(stamp);
  return true;
}

bool remove_feature(Workspace& ws, FeatureId feature) {
  require_feature(ws, feature);
  if (ws.features.is_root(feature)) fail(ErrorCode::CannotRemoveRoot, "'" + ws.features.get(feature).name + "'");
  if (ws.features.is_unassigned(feature)) fail(ErrorCode::CannotRemoveUnassigned, "");
  const ModelId mid = ws.features.get(feature).model;
  const FeatureId parent = *ws.features.get(feature).parent;

  std::set<std::string> removed;
  for (FeatureId f : ws.features.subtree(feature)) removed.insert(ws.features.get(f).name);

  std::vector<AssetId> drop;
  std::vector<AssetId> rewrite;
  for (AssetId a : ws.assets_in_scope(mid)) {
    const auto lits = ws.tree.get(a).pc.literals();
    const bool hit = std::any_of(lits.begin(), lits.end(), [&](const auto& l) { return removed.count(l) > 0; });
    if (!hit) continue;
    const bool only = std::all_of(lits.begin(), lits.end(), [&](const auto& l) { return removed.count(l) > 0; });
    (only ? drop : rewrite).push_back(a);
  }

  ws.features.erase_subtree(feature);
  const FeatureId stamp[] = {parent};
  ws.features.bump_model_version(mid, stamp);

  if (!rewrite.empty()) {
    for (AssetId a : rewrite) {
      Asset& asset = ws.tree.get_mut(a);
      for (const auto& name : removed) asset.pc = asset.pc.replace_literal(name, false);
    }
    ws.tree.bump_global_version(rewrite);
  }
  for (AssetId a : drop) {
    if (ws.tree.exists(a) && ws.tree.attached(a)) remove_asset(ws, a);
  }
  return true;
}

bool move_feature(Workspace& ws, FeatureId feature, FeatureId new_parent) {
  require_feature(ws, feature);
  require_feature(ws, new_parent);
  if (ws.features.is_root(feature)) fail(ErrorCode::CannotRemoveRoot, "the root feature cannot be moved");
  if (ws.features.is_unassigned(feature)) fail(ErrorCode::CannotRemoveUnassigned, "UNASSIGNED cannot be moved");
  const ModelId mid = ws.features.get(feature).model;
  if (ws.features.get(new_parent).model == mid) {
    const FeatureId old_parent = *ws.features.get(feature).parent;
    ws.features.reparent(feature, new_parent);
    const FeatureId stamp[] = {feature, old_parent, new_parent};
    ws.features.bump_model_version(mid, stamp);
    return true;
  }
  clone_feature_impl(ws, feature, new_parent, false);
  remove_feature(ws, feature);
  recompute_incomplete(ws);
  return true;
}

bool rename_feature(Workspace& ws, FeatureId feature, const std::string& new_name) {
  require_feature(ws, feature);
  require_feature_name(new_name);
  if (ws.features.is_unassigned(feature)) fail(ErrorCode::CannotRemoveUnassigned, "UNASSIGNED cannot be renamed");
  const Feature& f = ws.features.get(feature);
  if (f.name == new_name) return false;
  const ModelId mid = f.model;
  if (ws.features.find(mid, new_name)) fail(ErrorCode::DuplicateFeatureName, "'" + new_name + "'");
  const std::string old_name = f.name;
  const auto mapped = ws.mapped_assets(feature);
  ws.features.get_mut(feature).name = new_name;
  const FeatureId stamp[] = {feature};
  ws.features.bump_model_version(mid, stamp);
  if (!mapped.empty()) {
    for (AssetId a : mapped) {
      Asset& asset = ws.tree.get_mut(a);
      asset.pc = asset.pc.rename_literal(old_name, new_name);
    }
    ws.tree.bump_global_version(mapped);
  }
  return true;
}

bool make_optional(Workspace& ws, FeatureId feature) {
  require_feature(ws, feature);
  ws.features.get_mut(feature).optional = true;
  const FeatureId stamp[] = {feature};
  ws.features.bump_model_version(ws.features.get(feature).model, stamp);
  return true;
}

FeatureId clone_feature(Workspace& ws, FeatureId source, FeatureId target, const CloneFeatureOptions& options) {
  require_feature(ws, source);
  require_feature(ws, target);
  if (ws.features.is_unassigned(source)) fail(ErrorCode::InvalidArgument, "UNASSIGNED cannot be cloned");
  if (ws.features.get(source).model == ws.features.get(target).model) {
    if (source == target || ws.features.is_ancestor(source, target)) {
      fail(ErrorCode::CycleDetected, "cannot clone a feature below itself");
    }
  }
  const FeatureId c = clone_feature_impl(ws, source, target, options.adopt_existing);
  recompute_incomplete(ws);
  return c;
}

bool propagate_feature(Workspace& ws, FeatureId source, FeatureId target) {
  require_feature(ws, source);
  require_feature(ws, target);
  if (!ws.traces.latest_trace(source, target)) {
    fail(ErrorCode::NotAClone, "'" + ws.feature_path(target) + "' is not a clone of '" + ws.feature_path(source) + "'");
  }
  if (!needs_propagation(ws, source, target)) return false;
  propagate_feature_impl(ws, source, target);
  recompute_incomplete(ws);
  return true;
}

}  // namespace vplat::detail

namespace vplat::ops {

FeatureId add_feature(Workspace& ws, std::string name, FeatureId parent) {
  return ws.transact([&] {
    const FeatureId f = detail::add_feature(ws, name, parent);
    ws.record(opname::kAddFeature, {ws.feature_path(f)});
    return f;
  });
}

bool add_feature_model_to_asset(Workspace& ws, AssetId asset, ModelId model) {
  return ws.transact([&] {
    detail::add_feature_model(ws, asset, model);
    ws.record(opname::kAddFeatureModelToAsset, {ws.asset_path(asset)});
    return true;
  });
}

ModelId add_feature_model_from_text(Workspace& ws, AssetId asset, std::string_view fm_text) {
  return ws.transact([&] {
    const ModelId m = instantiate_feature_model(ws.features, parse_feature_model_file(fm_text));
    detail::add_feature_model(ws, asset, m);
    ws.record(opname::kAddFeatureModelToAsset, {ws.asset_path(asset)});
    return m;
  });
}

bool remove_feature(Workspace& ws, FeatureId feature) {
  return ws.transact([&] {
    const std::string path = ws.features.exists(feature) ? ws.feature_path(feature) : "";
    detail::remove_feature(ws, feature);
    ws.record(opname::kRemoveFeature, {path});
    return true;
  });
}

bool move_feature(Workspace& ws, FeatureId feature, FeatureId new_parent) {
  return ws.transact([&] {
    const std::string from = ws.features.exists(feature) ? ws.feature_path(feature) : "";
    detail::move_feature(ws, feature, new_parent);
    ws.record(opname::kMoveFeature, {from, ws.feature_path(new_parent)});
    return true;
  });
}

bool rename_feature(Workspace& ws, FeatureId feature, const std::string& new_name) {
  return ws.transact([&] {
    const std::string from = ws.features.exists(feature) ? ws.feature_path(feature) : "";
    if (!detail::rename_feature(ws, feature, new_name)) return false;
    ws.record(opname::kRenameFeature, {from, new_name});
    return true;
  });
}

bool make_feature_optional(Workspace& ws, FeatureId feature) {
  return ws.transact([&] {
    detail::make_optional(ws, feature);
    ws.record(opname::kMakeFeatureOptional, {ws.feature_path(feature)});
    return true;
  });
}

FeatureId clone_feature(Workspace& ws, FeatureId source, FeatureId target_parent,
                        const CloneFeatureOptions& options) {
  return ws.transact([&] {
    const FeatureId c = detail::clone_feature(ws, source, target_parent, options);
    ws.record(opname::kCloneFeature, {ws.feature_path(source), ws.feature_path(target_parent)});
    return c;
  });
}

bool propagate_feature(Workspace& ws, FeatureId source, FeatureId target) {
  return ws.transact([&] {
    if (!detail::propagate_feature(ws, source, target)) return false;
    ws.record(opname::kPropagateFeature, {ws.feature_path(source), ws.feature_path(target)});
    return true;
  });
}

}  // namespace vplat::ops
