// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vplat/operator_log.hpp"

// Cost-benefit accounting over an operator log.
namespace vplat {

struct CostModel {
  double cost_per_invocation = 60.0;  // t, seconds
  double omission_factor = 10.0;
  double feature_location_seconds = 900.0;
  double clone_detection_seconds = 900.0;
};

struct UsageCounts {
  std::map<std::string, std::uint64_t> per_operator;  // feature-oriented operators only
  std::uint64_t late = 0;
  std::uint64_t saved_feature_locations = 0;
  std::uint64_t saved_clone_detections = 0;

  std::uint64_t total() const;
  friend bool operator==(const UsageCounts&, const UsageCounts&) = default;
};

bool is_feature_oriented(std::string_view op);

UsageCounts tally(const OperatorLog& log);

double cost_feat(const UsageCounts& counts, const CostModel& model);
double total_benefit(const UsageCounts& counts, const CostModel& model);
// The t at which total_benefit is zero. Throws NoFeatureOps when no
// feature-oriented operator was invoked.
double break_even_seconds(const UsageCounts& counts, const CostModel& model);

// Counts with the given totals spread over a single synthetic operator, for
// evaluating the formulas on published aggregates.
UsageCounts aggregate_counts(std::uint64_t total, std::uint64_t late, std::uint64_t saved_locations,
                             std::uint64_t saved_clones);

}  // namespace vplat
