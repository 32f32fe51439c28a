// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace vplat {

// Strongly typed integer handle. Tag keeps asset, feature and model ids from
// being mixed up.
template <typename Tag>
struct Id {
  std::uint64_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint64_t v) : value(v) {}

  friend constexpr auto operator<=>(Id, Id) = default;
  friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using AssetId = Id<struct AssetTag>;
using FeatureId = Id<struct FeatureTag>;
using ModelId = Id<struct ModelTag>;

using Version = std::uint64_t;

}  // namespace vplat

template <typename Tag>
struct std::hash<vplat::Id<Tag>> {
  std::size_t operator()(vplat::Id<Tag> id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
