// SPDX-License-Identifier: Apache-2.0
#include "vplat/asset_ops.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ops_internal.hpp"
#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat::detail {

namespace {

void push_unique(std::vector<AssetId>& v, AssetId id) {
  if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
}

// Adds every literal of the subtree's presence conditions that the scope's
// model lacks, under UNASSIGNED, with a single model bump.
void ensure_literals(Workspace& ws, AssetId top) {
  std::map<ModelId, std::vector<FeatureId>> created;
  for (AssetId n : ws.tree.subtree(top)) {
    const auto lits = ws.tree.get(n).pc.literals();
    if (lits.empty()) continue;
    const ModelId mid = ws.tree.ancestor_feature_model(n);
    for (const auto& lit : lits) {
      if (ws.features.find(mid, lit)) continue;
      require_feature_name(lit);
      created[mid].push_back(ws.features.create_feature(lit, ws.features.model(mid).unassigned));
    }
  }
  for (auto& [mid, ids] : created) ws.features.bump_model_version(mid, ids);
}

// Clones a whole feature model, keeping feature versions, with one trace per
// feature (UNASSIGNED excluded).
ModelId clone_model(Workspace& ws, ModelId source) {
  const FeatureModel& sm = ws.features.model(source);
  const Version at = ws.features.model_version(source);
  const ModelId target = ws.features.create_model(ws.features.get(sm.root).name);
  const FeatureModel tm = ws.features.model(target);
  std::map<FeatureId, FeatureId> copy{{sm.root, tm.root}, {sm.unassigned, tm.unassigned}};
  for (FeatureId f : ws.features.subtree(sm.root)) {
    const Feature src = ws.features.get(f);
    FeatureId c;
    if (auto it = copy.find(f); it != copy.end()) {
      c = it->second;
    } else {
      c = ws.features.create_feature(src.name, copy.at(*src.parent));
      copy.emplace(f, c);
    }
    Feature& dst = ws.features.get_mut(c);
    dst.optional = src.optional;
    dst.group = src.group;
    dst.version = src.version;
    if (f != sm.unassigned) ws.traces.add_feature_trace(f, c, at);
  }
  return target;
}

// Literal renaming that tolerates swaps (A->B while B->A).
PresenceCondition rename_all(PresenceCondition pc, const std::vector<std::pair<std::string, std::string>>& renames) {
  std::vector<std::pair<std::string, std::string>> staged;
  for (const auto& [from, to] : renames) {
    if (from == to) continue;
    const std::string tmp = "\x01" + to;
    pc = pc.rename_literal(from, tmp);
    staged.emplace_back(tmp, to);
  }
  for (const auto& [tmp, to] : staged) pc = pc.rename_literal(tmp, to);
  return pc;
}

// Child of `target_parent` that is the most recently traced counterpart of
// `source_child`.
std::optional<AssetId> counterpart_child(const Workspace& ws, AssetId source_child, AssetId target_parent) {
  std::optional<AssetId> best;
  std::uint64_t best_seq = 0;
  for (AssetId c : ws.tree.get(target_parent).children) {
    auto t = ws.traces.latest_trace(source_child, c);
    if (t && t->seq > best_seq) {
      best = c;
      best_seq = t->seq;
    }
  }
  return best;
}

bool sync_node(Workspace& ws, AssetId source, AssetId target, Version version_at, bool force,
               std::vector<AssetId>& touched) {
  const bool ahead = force || ws.tree.get(source).version > version_at;
  bool changed = false;
  bool own = false;
  if (ahead) {
    const Asset s = ws.tree.get(source);
    if (ws.tree.get(target).name != s.name) {
      const Asset& t = ws.tree.get(target);
      if (t.parent) ws.tree.check_insertable(t.type, s.name, *t.parent, target);
      ws.tree.get_mut(target).name = s.name;
      own = true;
    }
    if (ws.tree.get(target).content != s.content) {
      ws.tree.get_mut(target).content = s.content;
      own = true;
    }
    const auto ms = ws.model_in_scope(source);
    const auto lits = s.pc.literals();
    if (ms && !lits.empty()) {
      std::vector<FeatureId> created;
      for (const auto& lit : lits) {
        auto fs = ws.features.find(*ms, lit);
        if (!fs) continue;
        const ModelId mt = ws.tree.ancestor_feature_model(target);
        const FeatureId ft = corresponding_feature(ws, *fs, mt, created);
        const std::string& tname = ws.features.get(ft).name;
        if (!ws.tree.get(target).pc.mentions(tname)) {
          Asset& t = ws.tree.get_mut(target);
          t.pc = t.pc.disjoin_feature(tname);
          own = true;
        }
      }
      if (!created.empty()) {
        ws.features.bump_model_version(ws.tree.ancestor_feature_model(target), created);
      }
    }
  }
  const std::vector<AssetId> kids = ws.tree.get(source).children;
  for (AssetId c : kids) {
    if (auto tc = counterpart_child(ws, c, target)) {
      const auto tr = ws.traces.latest_trace(c, *tc);
      changed |= sync_node(ws, c, *tc, tr->version_at, false, touched);
    } else if (ws.tree.get(c).version > version_at) {
      clone_into(ws, c, target);
      own = true;
    }
  }
  if (own) push_unique(touched, target);
  if (ahead) ws.traces.add_asset_trace(source, target, ws.tree.get(source).version);
  return changed || own;
}

}  // namespace

void require_attached(const Workspace& ws, AssetId id) {
  if (!ws.tree.exists(id) || !ws.tree.attached(id)) {
    fail(ErrorCode::NotFound, "asset #" + std::to_string(id.value) + " is not in the tree");
  }
}

bool add_asset(Workspace& ws, AssetId source, AssetId target) {
  require_attached(ws, target);
  if (!ws.tree.exists(source)) fail(ErrorCode::NotFound, "asset #" + std::to_string(source.value));
  if (ws.tree.attached(source)) {
    fail(ErrorCode::InvalidArgument, "'" + ws.asset_path(source) + "' is already in the tree");
  }
  require_asset_name(ws.tree.get(source).name);
  ws.tree.attach(source, target);
  ensure_literals(ws, source);
  std::vector<AssetId> touched = ws.tree.subtree(source);
  touched.push_back(target);
  ws.tree.bump_global_version(touched);
  return true;
}

bool change_asset(Workspace& ws, AssetId asset, const std::optional<std::string>& content,
                  const std::optional<std::string>& name) {
  require_attached(ws, asset);
  if (name) {
    if (asset == ws.tree.root()) fail(ErrorCode::InvalidArgument, "the root cannot be renamed");
    require_asset_name(*name);
    const Asset& a = ws.tree.get(asset);
    ws.tree.check_insertable(a.type, *name, *a.parent, asset);
    ws.tree.get_mut(asset).name = *name;
  }
  if (content) ws.tree.get_mut(asset).content = *content;
  const AssetId touched[] = {asset};
  ws.tree.bump_global_version(touched);
  return true;
}

bool remove_asset(Workspace& ws, AssetId asset) {
  if (asset == ws.tree.root()) fail(ErrorCode::CannotRemoveRoot, "");
  require_attached(ws, asset);
  const AssetId parent = *ws.tree.get(asset).parent;

  std::vector<std::pair<ModelId, std::string>> candidates;
  std::set<ModelId> owned;
  for (AssetId n : ws.tree.subtree(asset)) {
    const Asset& a = ws.tree.get(n);
    if (a.model) owned.insert(*a.model);
    auto mid = ws.model_in_scope(n);
    if (!mid) continue;
    for (auto& lit : a.pc.literals()) {
      std::pair<ModelId, std::string> key{*mid, lit};
      if (std::find(candidates.begin(), candidates.end(), key) == candidates.end()) {
        candidates.push_back(std::move(key));
      }
    }
  }

  ws.tree.erase_subtree(asset);
  for (ModelId m : owned) ws.features.erase_model(m);
  const AssetId stamp[] = {parent};
  ws.tree.bump_global_version(stamp);

  std::map<ModelId, std::vector<FeatureId>> bumped;
  for (const auto& [mid, lit] : candidates) {
    if (!ws.features.has_model(mid)) continue;
    auto fid = ws.features.find(mid, lit);
    if (!fid) continue;
    if (ws.features.is_root(*fid) || ws.features.is_unassigned(*fid)) continue;
    bool still_mapped = false;
    for (FeatureId f : ws.features.subtree(*fid)) {
      if (!ws.mapped_assets(f).empty()) {
        still_mapped = true;
        break;
      }
    }
    if (still_mapped) continue;
    const FeatureId fparent = *ws.features.get(*fid).parent;
    ws.features.erase_subtree(*fid);
    bumped[mid].push_back(fparent);
  }
  for (auto& [mid, parents] : bumped) {
    std::vector<FeatureId> live;
    for (FeatureId p : parents) {
      if (ws.features.exists(p)) live.push_back(p);
    }
    ws.features.bump_model_version(mid, live);
  }
  return true;
}

bool map_asset(Workspace& ws, AssetId asset, std::string_view feature) {
  require_feature_name(feature);
  require_attached(ws, asset);
  const ModelId mid = ws.tree.ancestor_feature_model(asset);
  if (!ws.features.find(mid, feature)) {
    const FeatureId f[] = {
        ws.features.create_feature(std::string(feature), ws.features.model(mid).unassigned)};
    ws.features.bump_model_version(mid, f);
  }
  Asset& a = ws.tree.get_mut(asset);
  a.pc = a.pc.disjoin_feature(feature);
  const AssetId touched[] = {asset};
  ws.tree.bump_global_version(touched);
  return true;
}

bool unmap_asset(Workspace& ws, AssetId asset, std::string_view feature) {
  require_attached(ws, asset);
  Asset& a = ws.tree.get_mut(asset);
  if (!a.pc.mentions(feature)) return false;
  a.pc = a.pc.replace_literal(feature, false);
  const AssetId touched[] = {asset};
  ws.tree.bump_global_version(touched);
  return true;
}

FeatureId corresponding_feature(Workspace& ws, FeatureId source_feature, ModelId target_model,
                                std::vector<FeatureId>& created) {
  const Feature& sf = ws.features.get(source_feature);
  if (sf.model == target_model) return source_feature;
  std::optional<FeatureId> traced;
  std::uint64_t best = 0;
  for (FeatureId l : ws.traces.linked(source_feature)) {
    if (!ws.features.exists(l) || ws.features.get(l).model != target_model) continue;
    auto t = ws.traces.latest_trace(source_feature, l);
    if (t->seq > best) {
      best = t->seq;
      traced = l;
    }
  }
  if (traced) return *traced;
  if (auto same = ws.features.find(target_model, sf.name)) return *same;
  const std::string name = sf.name;
  const bool optional = sf.optional;
  const Version at = ws.features.model_version(sf.model);
  const FeatureId c = ws.features.create_feature(name, ws.features.model(target_model).unassigned);
  ws.features.get_mut(c).optional = optional;
  ws.traces.add_feature_trace(source_feature, c, at);
  created.push_back(c);
  return c;
}

std::optional<AssetId> clone_in_scope(const Workspace& ws, AssetId original, AssetId scope_owner) {
  std::optional<AssetId> best;
  std::uint64_t best_seq = 0;
  for (AssetId l : ws.traces.linked(original)) {
    if (!ws.tree.exists(l) || !ws.tree.attached(l)) continue;
    if (l != scope_owner && !ws.tree.is_ancestor(scope_owner, l)) continue;
    auto t = ws.traces.latest_trace(original, l);
    if (t->seq > best_seq) {
      best_seq = t->seq;
      best = l;
    }
  }
  return best;
}

CloneResult clone_into(Workspace& ws, AssetId source, AssetId target, bool keep_top_pc) {
  require_attached(ws, source);
  require_attached(ws, target);
  if (source == ws.tree.root()) fail(ErrorCode::CannotCloneRoot, "");
  {
    const Asset& s = ws.tree.get(source);
    ws.tree.check_insertable(s.type, s.name, target);
  }
  const auto target_model = ws.model_in_scope(target);

  // Nodes whose presence conditions refer to a model cloned along with them.
  std::set<AssetId> nested;
  for (AssetId n : ws.tree.subtree(source)) {
    AssetId cur = n;
    while (true) {
      if (ws.tree.get(cur).model) {
        nested.insert(n);
        break;
      }
      if (cur == source) break;
      cur = *ws.tree.get(cur).parent;
    }
    if (!keep_top_pc && n == source) continue;
    if (!nested.count(n) && !ws.tree.get(n).pc.literals().empty() && !target_model) {
      fail(ErrorCode::NoFeatureModelInScope,
           "'" + ws.asset_path(target) + "' has no feature model for the mappings of '" + ws.asset_path(n) + "'");
    }
  }

  CloneResult cr = ws.tree.deep_clone(source);
  if (keep_top_pc) ws.tree.get_mut(cr.top).pc = ws.tree.get(source).pc;

  for (const auto& [orig, copy] : cr.pairs) {
    if (auto m = ws.tree.get(orig).model) ws.tree.get_mut(copy).model = clone_model(ws, *m);
  }

  std::vector<FeatureId> created;
  for (const auto& [orig, copy] : cr.pairs) {
    if (nested.count(orig) || (!keep_top_pc && copy == cr.top)) continue;
    const auto lits = ws.tree.get(orig).pc.literals();
    if (lits.empty()) continue;
    const auto ms = ws.model_in_scope(orig);
    std::vector<std::pair<std::string, std::string>> renames;
    for (const auto& lit : lits) {
      auto fs = ms ? ws.features.find(*ms, lit) : std::nullopt;
      if (!fs) continue;
      const FeatureId ft = corresponding_feature(ws, *fs, *target_model, created);
      renames.emplace_back(lit, ws.features.get(ft).name);
    }
    Asset& c = ws.tree.get_mut(copy);
    c.pc = rename_all(c.pc, renames);
  }
  if (!created.empty()) ws.features.bump_model_version(*target_model, created);

  ws.tree.attach(cr.top, target);
  for (const auto& [orig, copy] : cr.pairs) {
    ws.traces.add_asset_trace(orig, copy, ws.tree.get(orig).version);
  }
  return cr;
}

AssetId clone_asset(Workspace& ws, AssetId source, AssetId target) {
  CloneResult cr = clone_into(ws, source, target);
  const AssetId stamp[] = {target};
  ws.tree.bump_global_version(stamp);
  recompute_incomplete(ws);
  return cr.top;
}

bool make_consistent(Workspace& ws, AssetId source, AssetId target, Version version_at,
                     std::vector<AssetId>& touched) {
  return sync_node(ws, source, target, version_at, true, touched);
}

bool propagate_asset(Workspace& ws, AssetId source, AssetId target) {
  require_attached(ws, source);
  require_attached(ws, target);
  const auto tr = ws.traces.latest_trace(source, target);
  if (!tr) {
    fail(ErrorCode::NoTrace, "'" + ws.asset_path(target) + "' is not a clone of '" + ws.asset_path(source) + "'");
  }
  if (ws.tree.get(source).version <= tr->version_at) return false;
  std::vector<AssetId> touched;
  make_consistent(ws, source, target, tr->version_at, touched);
  push_unique(touched, target);
  ws.tree.bump_global_version(touched);
  recompute_incomplete(ws);
  return true;
}

void recompute_incomplete(Workspace& ws) {
  std::map<FeatureId, std::vector<FeatureId>> sources_of;
  for (const auto& t : ws.traces.feature_traces()) {
    if (!ws.features.exists(t.source) || !ws.features.exists(t.clone)) continue;
    auto& v = sources_of[t.clone];
    if (std::find(v.begin(), v.end(), t.source) == v.end()) v.push_back(t.source);
  }
  for (auto& [clone, sources] : sources_of) {
    auto owner = ws.model_owner(ws.features.get(clone).model);
    bool incomplete = false;
    if (owner) {
      for (FeatureId s : sources) {
        for (AssetId a : ws.mapped_assets(s)) {
          if (!clone_in_scope(ws, a, *owner)) {
            incomplete = true;
            break;
          }
        }
        if (incomplete) break;
      }
    }
    ws.features.get_mut(clone).incomplete = incomplete;
  }
}

}  // namespace vplat::detail

namespace vplat::ops {

bool add_asset(Workspace& ws, AssetId source, AssetId target) {
  return ws.transact([&] {
    detail::add_asset(ws, source, target);
    ws.record(opname::kAddAsset, {ws.asset_path(source), ws.asset_path(target)});
    return true;
  });
}

bool change_asset(Workspace& ws, AssetId asset, std::optional<std::string> content,
                  std::optional<std::string> name) {
  return ws.transact([&] {
    detail::change_asset(ws, asset, content, name);
    ws.record(opname::kChangeAsset, {ws.asset_path(asset)});
    return true;
  });
}

bool remove_asset(Workspace& ws, AssetId asset) {
  return ws.transact([&] {
    const std::string path = ws.tree.exists(asset) && ws.tree.attached(asset) ? ws.asset_path(asset) : "";
    detail::remove_asset(ws, asset);
    ws.record(opname::kRemoveAsset, {path});
    return true;
  });
}

bool move_asset(Workspace& ws, AssetId asset, AssetId new_target) {
  return ws.transact([&] {
    detail::require_attached(ws, asset);
    if (new_target == asset || ws.tree.is_ancestor(asset, new_target)) {
      fail(ErrorCode::CycleDetected, "cannot move '" + ws.asset_path(asset) + "' below itself");
    }
    const std::string from = ws.asset_path(asset);
    const AssetId moved = detail::clone_asset(ws, asset, new_target);
    detail::remove_asset(ws, asset);
    detail::recompute_incomplete(ws);
    ws.record(opname::kMoveAsset, {from, ws.asset_path(moved)});
    return true;
  });
}

bool map_asset_to_feature(Workspace& ws, AssetId asset, std::string_view feature) {
  return ws.transact([&] {
    detail::map_asset(ws, asset, feature);
    ws.record(opname::kMapAssetToFeature, {ws.asset_path(asset), std::string(feature)});
    return true;
  });
}

bool unmap_asset_from_feature(Workspace& ws, AssetId asset, std::string_view feature) {
  return ws.transact([&] {
    if (!detail::unmap_asset(ws, asset, feature)) return false;
    ws.record(opname::kUnmapAsset, {ws.asset_path(asset), std::string(feature)});
    return true;
  });
}

AssetId clone_asset(Workspace& ws, AssetId source, AssetId target) {
  return ws.transact([&] {
    const AssetId top = detail::clone_asset(ws, source, target);
    ws.record(opname::kCloneAsset, {ws.asset_path(source), ws.asset_path(target)});
    return top;
  });
}

bool propagate_asset(Workspace& ws, AssetId source, AssetId target) {
  return ws.transact([&] {
    if (!detail::propagate_asset(ws, source, target)) return false;
    ws.record(opname::kPropagateAsset, {ws.asset_path(source), ws.asset_path(target)});
    return true;
  });
}

}  // namespace vplat::ops
