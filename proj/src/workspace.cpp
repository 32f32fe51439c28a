// SPDX-License-Identifier: Apache-2.0
#include "vplat/workspace.hpp"

#include <algorithm>
#include <set>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

void Workspace::record(std::string op, std::vector<std::string> args) {
  log.push_back(OperatorApplication{std::move(op), std::move(args), tree.global_version(),
                                    derived_mode, false});
}

std::optional<ModelId> Workspace::model_in_scope(AssetId asset) const {
  auto owner = tree.ancestor_with_model(asset);
  if (!owner) return std::nullopt;
  return tree.get(*owner).model;
}

std::optional<AssetId> Workspace::model_owner(ModelId model) const {
  for (const auto& [id, a] : tree.all()) {
    if (a.model == model && tree.attached(id)) return id;
  }
  return std::nullopt;
}

std::vector<AssetId> Workspace::assets_in_scope(ModelId model) const {
  std::vector<AssetId> out;
  auto owner = model_owner(model);
  if (!owner) return out;
  std::vector<AssetId> stack{*owner};
  while (!stack.empty()) {
    AssetId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = tree.get(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (!tree.get(*it).model) stack.push_back(*it);
    }
  }
  return out;
}

std::vector<AssetId> Workspace::mapped_assets(FeatureId feature) const {
  const Feature& f = features.get(feature);
  std::vector<AssetId> out;
  for (AssetId a : assets_in_scope(f.model)) {
    if (tree.get(a).pc.mentions(f.name)) out.push_back(a);
  }
  return out;
}

std::vector<std::string> Workspace::mapped_features(AssetId asset) const {
  return tree.get(asset).pc.literals();
}

AssetId Workspace::resolve_asset(std::string_view path) const {
  return tree.resolve(AssetPath::parse(path));
}

std::string Workspace::asset_path(AssetId asset) const { return tree.path_of(asset).to_string(); }

FeatureId Workspace::resolve_feature(std::string_view qualified) const {
  const AssetPath full = AssetPath::parse(qualified);
  const auto& segs = full.segments;
  for (std::size_t k = segs.size() + 1; k-- > 0;) {
    AssetPath prefix{std::vector<std::string>(segs.begin(), segs.begin() + static_cast<long>(k))};
    auto owner = tree.try_resolve(prefix);
    if (!owner || !tree.get(*owner).model) continue;
    const ModelId mid = *tree.get(*owner).model;
    FeaturePath rest{std::vector<std::string>(segs.begin() + static_cast<long>(k), segs.end())};
    if (auto f = features.try_resolve(mid, rest)) return *f;
  }
  fail(ErrorCode::NotFound, "no feature at '" + std::string(qualified) + "'");
}

std::string Workspace::feature_path(FeatureId feature) const {
  const Feature& f = features.get(feature);
  auto owner = model_owner(f.model);
  FeaturePath fp = features.path_of(feature);
  std::vector<std::string> below(fp.segments.begin() + 1, fp.segments.end());
  std::string prefix = owner ? asset_path(*owner) : "<detached>";
  if (below.empty()) return prefix;
  return (prefix == "/" ? "" : prefix + "/") + join(below, "/");
}

std::vector<std::string> Workspace::check_invariants() const {
  std::vector<std::string> problems;
  const auto& all = tree.all();
  const AssetId root = tree.root();

  auto root_it = all.find(root);
  if (root_it == all.end() || root_it->second.type != AssetType::VpRoot || root_it->second.parent) {
    problems.push_back("root missing or malformed");
    return problems;
  }
  const Version global = root_it->second.version;

  // Walk down from the root; any revisit means a cycle or shared child.
  std::set<AssetId> seen;
  std::vector<AssetId> stack{root};
  while (!stack.empty()) {
    AssetId cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) {
      problems.push_back("asset #" + std::to_string(cur.value) + " reached twice");
      continue;
    }
    const Asset& a = all.at(cur);
    if (a.version > global) problems.push_back("asset '" + a.name + "' version exceeds global version");
    if (cur != root && a.type == AssetType::VpRoot) problems.push_back("second VpRoot");
    std::set<std::string> names;
    for (AssetId c : a.children) {
      auto it = all.find(c);
      if (it == all.end()) {
        problems.push_back("dangling child #" + std::to_string(c.value));
        continue;
      }
      const Asset& child = it->second;
      if (child.parent != cur) problems.push_back("child '" + child.name + "' has inconsistent parent");
      if (!containable(child.type, a.type)) {
        problems.push_back("containment violated: " + std::string(to_string(child.type)) + " in " +
                           std::string(to_string(a.type)));
      }
      if (!names.insert(child.name).second) problems.push_back("duplicate sibling name '" + child.name + "'");
      stack.push_back(c);
    }
  }
  for (const auto& [id, a] : all) {
    if (seen.count(id)) continue;
    if (a.parent && seen.count(*a.parent)) {
      problems.push_back("asset #" + std::to_string(id.value) + " claims an attached parent that does not list it");
    }
  }

  // Presence-condition literals must name features of the closest model.
  for (AssetId id : seen) {
    const auto lits = tree.get(id).pc.literals();
    if (lits.empty()) continue;
    auto mid = model_in_scope(id);
    if (!mid || !features.has_model(*mid)) {
      problems.push_back("asset '" + asset_path(id) + "' mapped without a feature model in scope");
      continue;
    }
    for (const auto& lit : lits) {
      if (!features.find(*mid, lit)) {
        problems.push_back("asset '" + asset_path(id) + "' maps unknown feature '" + lit + "'");
      }
    }
  }

  for (const auto& [mid, m] : features.models()) {
    if (!features.exists(m.root) || !features.exists(m.unassigned)) {
      problems.push_back("model #" + std::to_string(mid.value) + " lacks root or UNASSIGNED");
      continue;
    }
    if (features.get(m.unassigned).parent != m.root) problems.push_back("UNASSIGNED not below root");
    const Version mv = features.get(m.root).version;
    std::set<std::string> names;
    std::set<FeatureId> visited;
    std::vector<FeatureId> fstack{m.root};
    while (!fstack.empty()) {
      FeatureId cur = fstack.back();
      fstack.pop_back();
      if (!visited.insert(cur).second) {
        problems.push_back("feature cycle in model #" + std::to_string(mid.value));
        break;
      }
      const Feature& f = features.get(cur);
      if (f.model != mid) problems.push_back("feature '" + f.name + "' in wrong model");
      if (!names.insert(f.name).second) problems.push_back("duplicate feature name '" + f.name + "'");
      if (f.version > mv) problems.push_back("feature '" + f.name + "' version exceeds model version");
      for (FeatureId c : f.children) {
        if (!features.exists(c) || features.get(c).parent != cur) {
          problems.push_back("feature '" + f.name + "' has inconsistent child");
          continue;
        }
        fstack.push_back(c);
      }
    }
  }

  std::uint64_t last = 0;
  for (const auto& t : traces.asset_traces()) {
    if (t.source == t.clone) problems.push_back("self asset trace");
    if (t.seq <= last) problems.push_back("asset trace seq not increasing");
    last = t.seq;
  }
  last = 0;
  for (const auto& t : traces.feature_traces()) {
    if (t.source == t.clone) problems.push_back("self feature trace");
    if (t.seq <= last) problems.push_back("feature trace seq not increasing");
    last = t.seq;
  }
  return problems;
}

}  // namespace vplat
