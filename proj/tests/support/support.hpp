// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <optional>

#include "vplat/annotations.hpp"
#include "vplat/error.hpp"
#include "vplat/workspace.hpp"

// Fails the test unless `stmt` throws vplat::Error with the given code.
#define EXPECT_VPLAT_ERROR(stmt, err)                  \
  do {                                                 \
    try {                                              \
      stmt;                                            \
      ADD_FAILURE() << "expected " #err;               \
    } catch (const ::vplat::Error& e) {                \
      EXPECT_EQ(e.code(), ::vplat::ErrorCode::err) << e.what(); \
    }                                                  \
  } while (0)

namespace vplat::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& p, const std::string& bytes);
std::string read_file(const std::filesystem::path& p);

// Detached asset built in `ws`, for handing to ops::add_asset.
AssetId make_asset(Workspace& ws, const std::string& name, AssetType type, const std::string& content = {});
AssetId make_child(Workspace& ws, AssetId parent, const std::string& name, AssetType type,
                   const std::string& content = {});

// Tree, feature models and traces addressed by paths instead of ids. Two
// workspaces that differ only in id assignment dump identically.
std::string canonical_dump(const Workspace& ws, bool include_traces = true);

// ---- calculator running example -----------------------------------------

struct CalculatorRun {
  Workspace ws;
  // Checkpoints observed while the scenario runs.
  Version global_before_divide = 0;
  Version global_after_divide = 0;
  Version model_before_exp = 0;
  Version model_after_exp = 0;
  Version divide_version_at_clone = 0;
  Version clone_version_at_clone = 0;
  Version divide_version_before_propagation = 0;
  Version clone_version_before_propagation = 0;
  std::size_t traces_after_clone_asset = 0;
  std::size_t feature_traces_after_clone_asset = 0;
};

// BasicCalculator (BC) and ScientificCalculator (SC): divide added under
// Operators.js, cloned to SC, fixed and propagated, then EXP added and cloned
// with its method (sliced out of Operators.js) and its documentation file.
CalculatorRun run_calculator();

// ---- synthetic snapshot history -----------------------------------------

struct SyntheticHistory {
  std::filesystem::path manifest;
  std::filesystem::path clone_log;
  // (source asset path, target asset path) pairs planted as source-ahead at
  // the end of the history, sorted.
  std::vector<std::pair<std::string, std::string>> planted;
  std::size_t steps = 0;
  std::size_t clone_entries = 0;
};

// Writes ten snapshot directories of three calculator repositories, the
// history manifest and a five-entry clone log below `dir`.
SyntheticHistory write_synthetic_history(const std::filesystem::path& dir);

// ---- randomized fixtures -------------------------------------------------

using Rng = std::mt19937_64;

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Repositories R0..R(n-1), each owning a feature model with a few features,
// filled with folders, files, methods and blocks, some of them mapped.
Workspace random_workspace(Rng& rng);

std::vector<AssetId> attached_assets(const Workspace& ws, bool include_root = false);

// Random well-formed feature-model document: unique names, random group
// kinds, optional flags and (sometimes) an UNASSIGNED bucket.
FeatureModelDocument random_feature_model(Rng& rng);

// ---- annotation conformance corpus ---------------------------------------

struct AnnotationCase {
  const char* name;
  const char* text;
  std::optional<ErrorCode> error;  // nullopt: accepted
  std::size_t top_level_spans = 0;  // when accepted
};

const std::vector<AnnotationCase>& annotation_corpus();
std::vector<FeatureId> live_features(const Workspace& ws);

}  // namespace vplat::testing
