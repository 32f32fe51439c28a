// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vplat/workspace.hpp"

// Binding between a workspace and a directory: scanning, diffing and
// replaying filesystem changes as operator applications.
namespace vplat {

// Regular files (relative path -> bytes) and directories of a tree, with
// '/' separators. Excludes `.vp/`, `.vpignore` and ignored paths.
struct DirSnapshot {
  std::map<std::string, std::string> files;
  std::set<std::string> dirs;

  friend bool operator==(const DirSnapshot&, const DirSnapshot&) = default;
};

DirSnapshot read_directory(const std::filesystem::path& root);
// The files and directories the workspace currently represents.
DirSnapshot snapshot_of(const Workspace& ws);

struct ChangeEntry {
  enum class Status { A, M, D, R };
  Status status = Status::A;
  std::string path;
  std::string new_path;  // R only
  std::string content;   // A, M and R: new bytes
  bool directory = false;

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

struct ChangeSet {
  std::vector<ChangeEntry> entries;
  bool empty() const { return entries.empty(); }
};

char status_letter(ChangeEntry::Status status);

// A/M/D by path and content; a deletion and an addition with identical bytes
// (and no other candidate with those bytes) become one rename.
ChangeSet diff_snapshots(const DirSnapshot& old_snapshot, const DirSnapshot& new_snapshot);
ChangeSet diff_snapshots(const Workspace& old_ws, const std::filesystem::path& new_dir);

// Extra work slotted into the change-set precedence after the mapping files.
struct ApplyHooks {
  std::function<void(Workspace&)> clone_directives;  // step 4
  std::function<void(Workspace&)> propagations;      // step 5
};

// Applies a change set in precedence order: feature-model files, asset
// files, mapping files, then the hooks. All-or-nothing. Returns the derived
// operator applications in execution order.
std::vector<OperatorApplication> apply_change_set(Workspace& ws, const ChangeSet& cs, const ApplyHooks& hooks = {});

// Writes a change set onto a directory: A/M write bytes, D deletes, R
// renames, directory D removes only empty directories. Used to mirror
// operator effects back onto the bound directory.
void apply_to_directory(const std::filesystem::path& root, const ChangeSet& cs);

// Fresh workspace mirroring `root`.
Workspace scan(const std::filesystem::path& root);

// Layout chosen for a directory: several repositories when the top level
// holds directories only, otherwise one repository.
Layout detect_layout(const DirSnapshot& snapshot);

// Which role a file plays during synchronisation.
enum class FileRole { Asset, FeatureModel, FolderMapping, FilesMapping };
FileRole file_role(std::string_view relative_path);

}  // namespace vplat
