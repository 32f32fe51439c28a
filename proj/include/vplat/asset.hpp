// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplat/ids.hpp"
#include "vplat/presence_condition.hpp"

namespace vplat {

enum class AssetType { VpRoot, Repository, Folder, File, Class, Method, Block };

std::string_view to_string(AssetType type);
std::optional<AssetType> parse_asset_type(std::string_view text);

// Fixed containment order:
//   VpRoot     > Repository
//   Repository > Folder, File
//   Folder     > Folder, File
//   File       > Class, Method, Block
//   Class      > Class, Method, Block
//   Method     > Block
//   Block      > Block
bool containable(AssetType child, AssetType parent);

struct Asset {
  AssetId id;
  std::string name;
  AssetType type = AssetType::File;
  Version version = 0;  // 0 until inserted into the tree
  std::optional<AssetId> parent;
  std::vector<AssetId> children;
  PresenceCondition pc;
  std::optional<ModelId> model;
  std::string content;
};

// Slash-separated names from a child of the VpRoot downwards. The empty path
// addresses the VpRoot itself.
struct AssetPath {
  std::vector<std::string> segments;

  static AssetPath parse(std::string_view text);
  std::string to_string() const;
  bool is_root() const { return segments.empty(); }

  friend bool operator==(const AssetPath&, const AssetPath&) = default;
};

}  // namespace vplat
