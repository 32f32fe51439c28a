// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vplat {

enum class ErrorCode {
  NotFound,
  NotContainable,
  DuplicateName,
  CannotCloneRoot,
  CannotRemoveRoot,
  NotAnAncestor,
  NoFeatureModelInScope,
  FeatureModelAlreadyPresent,
  DuplicateFeatureName,
  CannotRemoveUnassigned,
  CycleDetected,
  NotAClone,
  NoTrace,
  SelfTrace,
  InvalidName,
  BadIndent,
  MisplacedGroupKeyword,
  EmptyDocument,
  UnbalancedAnnotation,
  MismatchedEnd,
  OverlapWithoutNesting,
  BadFeatureList,
  BadMappingRow,
  UnknownFile,
  IoFailure,
  CorruptState,
  LockHeld,
  NoWorkspace,
  BadManifest,
  CloneLogEntryInvalid,
  NoFeatureOps,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code);

// Every operator and parser failure is reported through this type. The
// message always starts with the error name so the CLI can surface it as-is.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace vplat
