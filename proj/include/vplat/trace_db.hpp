// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vplat/ids.hpp"

namespace vplat {

template <typename IdT>
struct Trace {
  IdT source;
  IdT clone;
  Version version_at = 0;  // source version when the clone was made or last synced
  std::uint64_t seq = 0;

  friend bool operator==(const Trace&, const Trace&) = default;
};

using AssetTrace = Trace<AssetId>;
using FeatureTrace = Trace<FeatureId>;

// Append-only clone provenance. Asset and feature traces share one sequence
// counter, so seq is strictly increasing within (and across) both lists.
class TraceDatabase {
 public:
  const AssetTrace& add_asset_trace(AssetId source, AssetId clone, Version version_at);
  const FeatureTrace& add_feature_trace(FeatureId source, FeatureId clone, Version version_at);

  // Highest-seq trace linking the pair in either direction.
  std::optional<AssetTrace> latest_trace(AssetId a, AssetId b) const;
  std::optional<FeatureTrace> latest_trace(FeatureId a, FeatureId b) const;

  bool is_clone(AssetId a, AssetId b) const { return latest_trace(a, b).has_value(); }
  bool is_clone(FeatureId a, FeatureId b) const { return latest_trace(a, b).has_value(); }

  // Direct clones only (no transitive closure), in order of first trace.
  std::vector<AssetId> clones_of(AssetId source) const;
  std::vector<FeatureId> clones_of(FeatureId source) const;

  // Everything linked to `id` by a trace in either direction.
  std::vector<AssetId> linked(AssetId id) const;
  std::vector<FeatureId> linked(FeatureId id) const;

  const std::vector<AssetTrace>& asset_traces() const { return asset_traces_; }
  const std::vector<FeatureTrace>& feature_traces() const { return feature_traces_; }
  std::uint64_t next_seq() const { return next_seq_; }

  static TraceDatabase from_rows(std::vector<AssetTrace> assets, std::vector<FeatureTrace> features,
                                 std::uint64_t next_seq);

 private:
  std::vector<AssetTrace> asset_traces_;
  std::vector<FeatureTrace> feature_traces_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace vplat
