// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "vplat/asset_tree.hpp"
#include "vplat/feature_model.hpp"
#include "vplat/operator_log.hpp"
#include "vplat/trace_db.hpp"

namespace vplat {

// How top-level directories of the bound directory map onto repositories.
enum class Layout {
  MultiRepo,   // every top-level directory is a Repository
  SingleRepo,  // the directory itself is one Repository named `repo_name`
};

// All meta-data of one virtual platform: the asset tree, feature models,
// clone traces and the operator log, plus the filesystem binding info.
//
// Workspace is a value type. Operators mutate it through `transact`, which
// restores the previous value if the operator throws.
class Workspace {
 public:
  AssetTree tree;
  FeatureStore features;
  TraceDatabase traces;
  OperatorLog log;

  Layout layout = Layout::MultiRepo;
  std::string repo_name;  // SingleRepo only
  // Last seen content of feature-model and mapping files, by relative path.
  std::map<std::string, std::string> feature_files;

  // When set, logged applications are marked as derived.
  bool derived_mode = false;

  // Runs `fn`; if it throws, the workspace reverts to its value before the
  // outermost active transaction began. Nested calls share that snapshot.
  template <typename Fn>
  auto transact(Fn&& fn) -> decltype(fn()) {
    if (txn_depth_ > 0) return fn();
    Workspace backup = *this;
    ++txn_depth_;
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        --txn_depth_;
        return;
      } else {
        auto result = fn();
        --txn_depth_;
        return result;
      }
    } catch (...) {
      *this = std::move(backup);
      throw;
    }
  }

  void record(std::string op, std::vector<std::string> args);

  // Closest ancestor-or-self feature model, if any.
  std::optional<ModelId> model_in_scope(AssetId asset) const;
  // Attached asset owning the model, if the model is still attached.
  std::optional<AssetId> model_owner(ModelId model) const;
  // Attached assets whose closest feature model is `model`.
  std::vector<AssetId> assets_in_scope(ModelId model) const;
  // Assets in the feature's model scope whose presence condition names it.
  std::vector<AssetId> mapped_assets(FeatureId feature) const;
  std::vector<std::string> mapped_features(AssetId asset) const;

  AssetId resolve_asset(std::string_view path) const;
  std::string asset_path(AssetId asset) const;

  // Qualified feature path: the path of the model-owning asset followed by
  // the feature path below the model root (e.g. "BC/EXP").
  FeatureId resolve_feature(std::string_view qualified) const;
  std::string feature_path(FeatureId feature) const;

  // All structural invariants; empty when the workspace is well formed.
  std::vector<std::string> check_invariants() const;

 private:
  int txn_depth_ = 0;
};

}  // namespace vplat
