// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vplat/error.hpp"
#include "vplat/workspace.hpp"

// Replays a series of directory snapshots as operator applications.
namespace vplat {

struct HistoryStep {
  std::uint64_t index = 0;
  std::filesystem::path snapshot_dir;
  std::string ref;  // defaults to the index
};

struct CloneLogEntry {
  std::string feature;  // path of the feature inside the source repository
  std::string source_repo;
  std::string target_repo;
  std::string source_ref;
  std::string target_ref;  // the entry applies at the step carrying this ref
  std::size_t line = 0;
};

// `index<TAB>snapshotDir[<TAB>ref]` rows; relative directories resolve
// against the manifest's directory. Throws BadManifest.
std::vector<HistoryStep> read_history_manifest(const std::filesystem::path& manifest);
std::vector<HistoryStep> parse_history_manifest(std::string_view text, const std::filesystem::path& base_dir);

// `feature<TAB>sourceRepo<TAB>targetRepo<TAB>sourceRef<TAB>targetRef` rows.
// Throws CloneLogEntryInvalid.
std::vector<CloneLogEntry> read_clone_log(const std::filesystem::path& path);
std::vector<CloneLogEntry> parse_clone_log(std::string_view text);

struct PropagationCandidate {
  AssetId source;
  AssetId target;
  FeatureId source_feature;
  FeatureId target_feature;

  friend bool operator==(const PropagationCandidate&, const PropagationCandidate&) = default;
};

// Clone assets mapped to a feature clone whose source asset changed since
// their latest trace. Sorted by (target, source).
std::vector<PropagationCandidate> detect_propagations(const Workspace& ws);

struct ReplayOptions {
  bool apply_propagations = false;
  std::string repo_name = "repo";  // used when the baseline is a single repository
};

struct ReplayResult {
  Workspace workspace;
  // Candidates reported after each step: (step index, candidate).
  std::vector<std::pair<std::uint64_t, PropagationCandidate>> propagations;
  // Set when a step failed; the workspace then holds the state before it.
  std::optional<Error> error;
  std::optional<std::uint64_t> failed_step;
};

ReplayResult replay(const std::vector<HistoryStep>& steps, const std::vector<CloneLogEntry>& clone_log,
                    const ReplayOptions& options = {});

}  // namespace vplat
