// SPDX-License-Identifier: Apache-2.0
#include "vplat/trace_db.hpp"

#include <algorithm>
#include <string>

#include "vplat/error.hpp"

namespace vplat {

namespace {

template <typename IdT>
std::optional<Trace<IdT>> latest(const std::vector<Trace<IdT>>& traces, IdT a, IdT b) {
  for (auto it = traces.rbegin(); it != traces.rend(); ++it) {
    if ((it->source == a && it->clone == b) || (it->source == b && it->clone == a)) return *it;
  }
  return std::nullopt;
}

template <typename IdT>
std::vector<IdT> direct_clones(const std::vector<Trace<IdT>>& traces, IdT source) {
  std::vector<IdT> out;
  for (const auto& t : traces) {
    if (t.source == source && std::find(out.begin(), out.end(), t.clone) == out.end()) {
      out.push_back(t.clone);
    }
  }
  return out;
}

template <typename IdT>
std::vector<IdT> linked_to(const std::vector<Trace<IdT>>& traces, IdT id) {
  std::vector<IdT> out;
  for (const auto& t : traces) {
    IdT other;
    if (t.source == id) {
      other = t.clone;
    } else if (t.clone == id) {
      other = t.source;
    } else {
      continue;
    }
    if (std::find(out.begin(), out.end(), other) == out.end()) out.push_back(other);
  }
  return out;
}

}  // namespace

const AssetTrace& TraceDatabase::add_asset_trace(AssetId source, AssetId clone, Version version_at) {
  if (source == clone) fail(ErrorCode::SelfTrace, "asset #" + std::to_string(source.value));
  asset_traces_.push_back(AssetTrace{source, clone, version_at, next_seq_++});
  return asset_traces_.back();
}

const FeatureTrace& TraceDatabase::add_feature_trace(FeatureId source, FeatureId clone,
                                                     Version version_at) {
  if (source == clone) fail(ErrorCode::SelfTrace, "feature #" + std::to_string(source.value));
  feature_traces_.push_back(FeatureTrace{source, clone, version_at, next_seq_++});
  return feature_traces_.back();
}

std::optional<AssetTrace> TraceDatabase::latest_trace(AssetId a, AssetId b) const {
  return latest(asset_traces_, a, b);
}

std::optional<FeatureTrace> TraceDatabase::latest_trace(FeatureId a, FeatureId b) const {
  return latest(feature_traces_, a, b);
}

std::vector<AssetId> TraceDatabase::clones_of(AssetId source) const {
  return direct_clones(asset_traces_, source);
}

std::vector<FeatureId> TraceDatabase::clones_of(FeatureId source) const {
  return direct_clones(feature_traces_, source);
}

std::vector<AssetId> TraceDatabase::linked(AssetId id) const { return linked_to(asset_traces_, id); }

std::vector<FeatureId> TraceDatabase::linked(FeatureId id) const {
  return linked_to(feature_traces_, id);
}

TraceDatabase TraceDatabase::from_rows(std::vector<AssetTrace> assets,
                                       std::vector<FeatureTrace> features, std::uint64_t next_seq) {
  TraceDatabase db;
  db.asset_traces_ = std::move(assets);
  db.feature_traces_ = std::move(features);
  db.next_seq_ = next_seq;
  return db;
}

}  // namespace vplat
