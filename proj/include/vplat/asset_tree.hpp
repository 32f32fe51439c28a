// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vplat/asset.hpp"

namespace vplat {

// Original/copy pairs produced by cloning, in pre-order of the original.
using ClonePairs = std::vector<std::pair<AssetId, AssetId>>;

struct CloneResult {
  AssetId top;
  ClonePairs pairs;
};

// A slice is a chain of single-child container copies ending in a deep clone
// of the sliced asset. `containers` lists the container pairs top-down;
// `leaf` is the deep clone.
struct SliceResult {
  AssetId top;
  ClonePairs containers;
  CloneResult leaf;
};

// Owns every asset of a workspace, attached or detached. Assets are addressed
// by stable id; the VpRoot is created on construction with version 1.
//
// Detached assets (no parent, not the root) are staging objects for insertion.
// They carry version 0 and are dropped on persistence.
class AssetTree {
 public:
  AssetTree();

  AssetId root() const { return root_; }
  Version global_version() const { return assets_.at(root_).version; }

  bool exists(AssetId id) const { return assets_.count(id) > 0; }
  bool attached(AssetId id) const;
  const Asset& get(AssetId id) const;
  Asset& get_mut(AssetId id);

  AssetId create_detached(std::string name, AssetType type, std::string content = {});

  // Links a detached asset under `parent`. Validates containment and sibling
  // names; does not touch versions.
  void attach(AssetId child, AssetId parent);
  void detach(AssetId id);
  void erase_subtree(AssetId id);

  // Throws NotContainable / DuplicateName when `child` could not go under
  // `parent`. `ignore` skips one sibling in the name check (renames, moves).
  void check_insertable(AssetType type, std::string_view name, AssetId parent,
                        std::optional<AssetId> ignore = std::nullopt) const;

  std::optional<AssetId> find_child(AssetId parent, std::string_view name) const;
  AssetId resolve(const AssetPath& path) const;
  std::optional<AssetId> try_resolve(const AssetPath& path) const;
  AssetPath path_of(AssetId id) const;

  std::vector<AssetId> subtree(AssetId id) const;  // pre-order, includes id
  std::vector<AssetId> ancestors(AssetId id) const;  // parent first, root last
  bool is_ancestor(AssetId ancestor, AssetId descendant) const;  // proper
  std::size_t depth(AssetId id) const;

  CloneResult deep_clone(AssetId source);
  SliceResult get_slice(AssetId asset, AssetId ancestor);

  // Increments the global version and stamps every touched asset with it.
  Version bump_global_version(std::span<const AssetId> touched);

  std::optional<AssetId> ancestor_with_model(AssetId id) const;  // ancestor-or-self
  ModelId ancestor_feature_model(AssetId id) const;  // throws NoFeatureModelInScope

  const std::map<AssetId, Asset>& all() const { return assets_; }
  std::uint64_t next_id() const { return next_id_; }

  // Rebuilds a tree from persisted rows; validation is done by the caller.
  static AssetTree from_rows(std::map<AssetId, Asset> assets, AssetId root, std::uint64_t next_id);

 private:
  AssetTree(std::map<AssetId, Asset> assets, AssetId root, std::uint64_t next_id);

  AssetId copy_node(AssetId source);

  std::map<AssetId, Asset> assets_;
  AssetId root_;
  std::uint64_t next_id_ = 1;
};

}  // namespace vplat
