// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "vplat/workspace.hpp"

namespace vplat {

struct CloneFeatureOptions {
  // Link same-named features and assets already present in the target scope
  // instead of failing on the name clash. Used when replaying history, where
  // the target repository already contains the copied artifacts.
  bool adopt_existing = false;
};

}  // namespace vplat

// Feature-oriented operators. Atomic, one log entry per successful call.
namespace vplat::ops {

FeatureId add_feature(Workspace& ws, std::string name, FeatureId parent);

// Makes `model` (a model not yet owned by any asset) the feature model of
// `asset`. Literals used below the asset that the model lacks are added
// under UNASSIGNED.
bool add_feature_model_to_asset(Workspace& ws, AssetId asset, ModelId model);

// Parses `fm_text` as a feature-model file and attaches the result to `asset`.
ModelId add_feature_model_from_text(Workspace& ws, AssetId asset, std::string_view fm_text);

// Removes the feature and its sub-features. Assets mapped only to removed
// features are removed; other mappings to them become false.
bool remove_feature(Workspace& ws, FeatureId feature);

// Re-parents within the same model; across models it clones the feature
// into the new parent and removes the original.
bool move_feature(Workspace& ws, FeatureId feature, FeatureId new_parent);

bool rename_feature(Workspace& ws, FeatureId feature, const std::string& new_name);

bool make_feature_optional(Workspace& ws, FeatureId feature);

// Clones the feature subtree under `target_parent` (in another model) and
// slices every mapped asset into the target model's owner.
FeatureId clone_feature(Workspace& ws, FeatureId source, FeatureId target_parent,
                        const CloneFeatureOptions& options = {});

// Propagates changes of a cloned feature to its clone. Returns false when
// nothing is pending.
bool propagate_feature(Workspace& ws, FeatureId source, FeatureId target);

}  // namespace vplat::ops
