// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vplat/ids.hpp"

namespace vplat {

// One top-level operator invocation. Nested operator calls made by an
// operator (cascades, recursive clones) are not logged separately.
struct OperatorApplication {
  std::string op;
  std::vector<std::string> args;
  Version result_version = 0;  // global AT version after the operator
  bool derived = false;        // inferred from filesystem/history rather than user-invoked
  bool late = false;           // mapping omitted at creation and added later (or fixed by one)

  friend bool operator==(const OperatorApplication&, const OperatorApplication&) = default;
};

using OperatorLog = std::vector<OperatorApplication>;

// Operator names as they appear in the log.
namespace opname {
inline constexpr const char* kAddAsset = "AddAsset";
inline constexpr const char* kChangeAsset = "ChangeAsset";
inline constexpr const char* kRemoveAsset = "RemoveAsset";
inline constexpr const char* kMoveAsset = "MoveAsset";
inline constexpr const char* kMapAssetToFeature = "MapAssetToFeature";
inline constexpr const char* kUnmapAsset = "UnmapAssetFromFeature";
inline constexpr const char* kCloneAsset = "CloneAsset";
inline constexpr const char* kPropagateAsset = "PropagateAsset";
inline constexpr const char* kAddFeature = "AddFeature";
inline constexpr const char* kAddFeatureModelToAsset = "AddFeatureModelToAsset";
inline constexpr const char* kRemoveFeature = "RemoveFeature";
inline constexpr const char* kMoveFeature = "MoveFeature";
inline constexpr const char* kRenameFeature = "RenameFeature";
inline constexpr const char* kMakeFeatureOptional = "MakeFeatureOptional";
inline constexpr const char* kCloneFeature = "CloneFeature";
inline constexpr const char* kPropagateFeature = "PropagateFeature";
}  // namespace opname

}  // namespace vplat
