// SPDX-License-Identifier: Apache-2.0
#include "vplat/asset.hpp"

#include <array>

#include "vplat/names.hpp"

namespace vplat {

namespace {

constexpr std::array<std::string_view, 7> kTypeNames = {
    "VpRoot", "Repository", "Folder", "File", "Class", "Method", "Block"};

}  // namespace

std::string_view to_string(AssetType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<AssetType> parse_asset_type(std::string_view text) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == text) return static_cast<AssetType>(i);
  }
  return std::nullopt;
}

bool containable(AssetType child, AssetType parent) {
  using T = AssetType;
  switch (parent) {
    case T::VpRoot: return child == T::Repository;
    case T::Repository: return child == T::Folder || child == T::File;
    case T::Folder: return child == T::Folder || child == T::File;
    case T::File: return child == T::Class || child == T::Method || child == T::Block;
    case T::Class: return child == T::Class || child == T::Method || child == T::Block;
    case T::Method: return child == T::Block;
    case T::Block: return child == T::Block;
  }
  return false;
}

AssetPath AssetPath::parse(std::string_view text) {
  AssetPath path;
  for (auto& seg : split(text, '/')) {
    if (!seg.empty()) path.segments.push_back(std::move(seg));
  }
  return path;
}

std::string AssetPath::to_string() const {
  return segments.empty() ? std::string("/") : join(segments, "/");
}

}  // namespace vplat
