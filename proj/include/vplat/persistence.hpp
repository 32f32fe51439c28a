// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vplat/workspace.hpp"

// On-disk state under <root>/.vp/: tab-separated tables, LF line endings,
// rows sorted by id or sequence number.
namespace vplat {

inline constexpr const char* kStateDir = ".vp";

// File name -> bytes for every state file. Only attached assets and the
// models they own are written.
std::map<std::string, std::string> serialize_state(const Workspace& ws);
// Throws CorruptState on malformed rows or invariant violations.
Workspace deserialize_state(const std::map<std::string, std::string>& files);

void save_workspace(const Workspace& ws, const std::filesystem::path& root);
Workspace load_workspace(const std::filesystem::path& root);
bool has_workspace(const std::filesystem::path& root);

// Advisory lock on <root>/.vp/lock. Exclusive for writers, shared for
// readers; a conflicting holder raises LockHeld instead of blocking.
class WorkspaceLock {
 public:
  WorkspaceLock(const std::filesystem::path& root, bool exclusive);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  int fd_ = -1;
};

std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

}  // namespace vplat
