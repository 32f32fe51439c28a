// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "vplat/workspace.hpp"

// Asset-oriented operators. Each call is atomic: on error the workspace is
// left exactly as it was. Successful calls append one entry to the log.
namespace vplat::ops {

// Parents the detached asset `source` (and its subtree) under `target`.
// Features named in the subtree's presence conditions are added to the
// closest feature model under UNASSIGNED when missing.
bool add_asset(Workspace& ws, AssetId source, AssetId target);

// Updates payload and/or name. Bumps the global version even when nothing
// differs.
bool change_asset(Workspace& ws, AssetId asset, std::optional<std::string> content,
                  std::optional<std::string> name = std::nullopt);

// Removes the asset with its subtree. Features that lose their last mapped
// asset through the removal are deleted from their feature model.
bool remove_asset(Workspace& ws, AssetId asset);

// cloneAsset followed by removeAsset of the original.
bool move_asset(Workspace& ws, AssetId asset, AssetId new_target);

// Disjoins `feature` into the asset's presence condition, creating the
// feature under UNASSIGNED if the closest feature model lacks it.
bool map_asset_to_feature(Workspace& ws, AssetId asset, std::string_view feature);

// Replaces `feature` by false in the asset's presence condition.
bool unmap_asset_from_feature(Workspace& ws, AssetId asset, std::string_view feature);

// Deep-clones `source` under `target`, cloning mapped features into the
// target's feature model and recording one trace per cloned node. Returns the
// top clone.
AssetId clone_asset(Workspace& ws, AssetId source, AssetId target);

// Propagates changes made to `source` since its latest trace with `target`.
// Returns false (and changes nothing) when the source is not ahead.
bool propagate_asset(Workspace& ws, AssetId source, AssetId target);

}  // namespace vplat::ops
