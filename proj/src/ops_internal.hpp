// SPDX-License-Identifier: Apache-2.0
#pragma once

// Unlogged, non-transactional operator bodies shared by the asset and
// feature operators and by workspace synchronisation.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplat/feature_ops.hpp"
#include "vplat/workspace.hpp"

namespace vplat::detail {

void require_attached(const Workspace& ws, AssetId id);

bool add_asset(Workspace& ws, AssetId source, AssetId target);
bool change_asset(Workspace& ws, AssetId asset, const std::optional<std::string>& content,
                  const std::optional<std::string>& name);
bool remove_asset(Workspace& ws, AssetId asset);
bool map_asset(Workspace& ws, AssetId asset, std::string_view feature);
bool unmap_asset(Workspace& ws, AssetId asset, std::string_view feature);

// Clone without the global version bump; the caller stamps the target. With
// `keep_top_pc` false the top clone starts from presence condition true.
CloneResult clone_into(Workspace& ws, AssetId source, AssetId target, bool keep_top_pc = true);
AssetId clone_asset(Workspace& ws, AssetId source, AssetId target);
bool propagate_asset(Workspace& ws, AssetId source, AssetId target);

// Brings `target` in line with `source`: name, payload, mappings, and
// sub-assets added at the source. Clone-local additions are kept. Appends
// refreshed traces for every node it synchronised; returns whether anything
// changed. `touched` collects assets whose own state changed.
bool make_consistent(Workspace& ws, AssetId source, AssetId target, Version version_at,
                     std::vector<AssetId>& touched);

// Feature in `target_model` standing for `source_feature`: the feature itself
// when the models coincide, else a traced clone, else a same-named feature,
// else a new clone under UNASSIGNED (appended to `created`, with a trace).
FeatureId corresponding_feature(Workspace& ws, FeatureId source_feature, ModelId target_model,
                                std::vector<FeatureId>& created);

// A traced clone of `original` located at or below `scope_owner`.
std::optional<AssetId> clone_in_scope(const Workspace& ws, AssetId original, AssetId scope_owner);

// Recomputes the `incomplete` flag of every traced feature clone.
void recompute_incomplete(Workspace& ws);

FeatureId add_feature(Workspace& ws, std::string name, FeatureId parent);
bool add_feature_model(Workspace& ws, AssetId asset, ModelId model);
bool remove_feature(Workspace& ws, FeatureId feature);
bool move_feature(Workspace& ws, FeatureId feature, FeatureId new_parent);
bool rename_feature(Workspace& ws, FeatureId feature, const std::string& new_name);
bool make_optional(Workspace& ws, FeatureId feature);

FeatureId clone_feature(Workspace& ws, FeatureId source, FeatureId target,
                        const CloneFeatureOptions& options = {});
bool propagate_feature(Workspace& ws, FeatureId source, FeatureId target);

}  // namespace vplat::detail
