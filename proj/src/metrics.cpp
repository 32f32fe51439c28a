// SPDX-License-Identifier: Apache-2.0
#include "vplat/metrics.hpp"

#include <array>
#include <string_view>

#include "vplat/error.hpp"

namespace vplat {

namespace {

constexpr std::array<std::string_view, 8> kFeatureOriented = {
    opname::kMapAssetToFeature, opname::kAddFeature,          opname::kAddFeatureModelToAsset,
    opname::kRemoveFeature,     opname::kMoveFeature,         opname::kMakeFeatureOptional,
    opname::kCloneFeature,      opname::kPropagateFeature,
};

}  // namespace

std::uint64_t UsageCounts::total() const {
  std::uint64_t n = 0;
  for (const auto& [op, c] : per_operator) n += c;
  return n;
}

bool is_feature_oriented(std::string_view op) {
  for (auto name : kFeatureOriented) {
    if (name == op) return true;
  }
  return false;
}

UsageCounts tally(const OperatorLog& log) {
  UsageCounts c;
  for (const auto& e : log) {
    if (!is_feature_oriented(e.op)) continue;
    ++c.per_operator[e.op];
    if (e.op == opname::kMapAssetToFeature && e.late) ++c.late;
    if ((e.op == opname::kCloneFeature || e.op == opname::kPropagateFeature) && !e.late) {
      ++c.saved_feature_locations;
    }
    if (e.op == opname::kPropagateFeature) ++c.saved_clone_detections;
  }
  return c;
}

double cost_feat(const UsageCounts& counts, const CostModel& model) {
  return static_cast<double>(counts.total()) * model.cost_per_invocation;
}

double total_benefit(const UsageCounts& counts, const CostModel& model) {
  const double miss = static_cast<double>(counts.late) * model.omission_factor * model.cost_per_invocation;
  const double saved = static_cast<double>(counts.saved_feature_locations) * model.feature_location_seconds +
                       static_cast<double>(counts.saved_clone_detections) * model.clone_detection_seconds;
  return -(cost_feat(counts, model) + miss) + saved;
}

double break_even_seconds(const UsageCounts& counts, const CostModel& model) {
  const double denom =
      static_cast<double>(counts.total()) + static_cast<double>(counts.late) * model.omission_factor;
  if (denom <= 0.0) fail(ErrorCode::NoFeatureOps, "the log has no feature-oriented operator applications");
  const double saved = static_cast<double>(counts.saved_feature_locations) * model.feature_location_seconds +
                       static_cast<double>(counts.saved_clone_detections) * model.clone_detection_seconds;
  return saved / denom;
}

UsageCounts aggregate_counts(std::uint64_t total, std::uint64_t late, std::uint64_t saved_locations,
                             std::uint64_t saved_clones) {
  UsageCounts c;
  if (total > 0) c.per_operator["FeatureOriented"] = total;
  c.late = late;
  c.saved_feature_locations = saved_locations;
  c.saved_clone_detections = saved_clones;
  return c;
}

}  // namespace vplat
