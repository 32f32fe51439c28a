// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vplat/ids.hpp"

namespace vplat {

enum class GroupKind { And, Or, Xor };

std::string_view to_string(GroupKind kind);
std::optional<GroupKind> parse_group_kind(std::string_view text);

inline constexpr std::string_view kUnassigned = "UNASSIGNED";

struct Feature {
  FeatureId id;
  ModelId model;
  std::string name;
  bool optional = false;
  bool incomplete = false;
  GroupKind group = GroupKind::And;  // relation among this feature's children
  Version version = 0;
  std::optional<FeatureId> parent;
  std::vector<FeatureId> children;
};

// Root feature plus the mandatory UNASSIGNED bucket directly below it. The
// model's global version is the root feature's version.
struct FeatureModel {
  ModelId id;
  FeatureId root;
  FeatureId unassigned;
};

struct FeaturePath {
  std::vector<std::string> segments;

  static FeaturePath parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const FeaturePath&, const FeaturePath&) = default;
};

// Owns all feature models of a workspace.
class FeatureStore {
 public:
  // Fresh model at version 0 holding the root and the UNASSIGNED bucket.
  ModelId create_model(std::string root_name);
  void erase_model(ModelId id);

  bool has_model(ModelId id) const { return models_.count(id) > 0; }
  const FeatureModel& model(ModelId id) const;
  Version model_version(ModelId id) const { return get(model(id).root).version; }

  bool exists(FeatureId id) const { return features_.count(id) > 0; }
  const Feature& get(FeatureId id) const;
  Feature& get_mut(FeatureId id);

  std::optional<FeatureId> find(ModelId model, std::string_view name) const;

  // Walks names from the root. A leading segment equal to the root's name is
  // optional, and a lone segment falls back to a by-name lookup.
  FeatureId resolve(ModelId model, const FeaturePath& path) const;
  std::optional<FeatureId> try_resolve(ModelId model, const FeaturePath& path) const;
  FeaturePath path_of(FeatureId id) const;  // starts with the root name

  // Creates a feature under `parent` (version 0). Throws DuplicateFeatureName.
  FeatureId create_feature(std::string name, FeatureId parent);
  void reparent(FeatureId id, FeatureId new_parent);
  void erase_subtree(FeatureId id);

  std::vector<FeatureId> subtree(FeatureId id) const;  // pre-order
  bool is_ancestor(FeatureId ancestor, FeatureId descendant) const;  // proper
  bool is_root(FeatureId id) const { return !get(id).parent; }
  bool is_unassigned(FeatureId id) const;

  // Increments the model version and stamps the touched features with it.
  Version bump_model_version(ModelId model, std::span<const FeatureId> touched);

  // True iff the feature or any feature below it carries a version newer
  // than `since`.
  bool detect_changes(FeatureId id, Version since) const;

  const std::map<ModelId, FeatureModel>& models() const { return models_; }
  const std::map<FeatureId, Feature>& all() const { return features_; }
  std::uint64_t next_feature_id() const { return next_feature_; }
  std::uint64_t next_model_id() const { return next_model_; }

  static FeatureStore from_rows(std::map<ModelId, FeatureModel> models,
                                std::map<FeatureId, Feature> features,
                                std::uint64_t next_model, std::uint64_t next_feature);

 private:
  std::map<ModelId, FeatureModel> models_;
  std::map<FeatureId, Feature> features_;
  std::uint64_t next_model_ = 1;
  std::uint64_t next_feature_ = 1;
};

}  // namespace vplat
