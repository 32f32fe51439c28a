// SPDX-License-Identifier: Apache-2.0
#include "vplat/error.hpp"

namespace vplat {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NotContainable: return "NotContainable";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::CannotCloneRoot: return "CannotCloneRoot";
    case ErrorCode::CannotRemoveRoot: return "CannotRemoveRoot";
    case ErrorCode::NotAnAncestor: return "NotAnAncestor";
    case ErrorCode::NoFeatureModelInScope: return "NoFeatureModelInScope";
    case ErrorCode::FeatureModelAlreadyPresent: return "FeatureModelAlreadyPresent";
    case ErrorCode::DuplicateFeatureName: return "DuplicateFeatureName";
    case ErrorCode::CannotRemoveUnassigned: return "CannotRemoveUnassigned";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NotAClone: return "NotAClone";
    case ErrorCode::NoTrace: return "NoTrace";
    case ErrorCode::SelfTrace: return "SelfTrace";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::BadIndent: return "BadIndent";
    case ErrorCode::MisplacedGroupKeyword: return "MisplacedGroupKeyword";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::UnbalancedAnnotation: return "UnbalancedAnnotation";
    case ErrorCode::MismatchedEnd: return "MismatchedEnd";
    case ErrorCode::OverlapWithoutNesting: return "OverlapWithoutNesting";
    case ErrorCode::BadFeatureList: return "BadFeatureList";
    case ErrorCode::BadMappingRow: return "BadMappingRow";
    case ErrorCode::UnknownFile: return "UnknownFile";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::CorruptState: return "CorruptState";
    case ErrorCode::LockHeld: return "LockHeld";
    case ErrorCode::NoWorkspace: return "NoWorkspace";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::CloneLogEntryInvalid: return "CloneLogEntryInvalid";
    case ErrorCode::NoFeatureOps: return "NoFeatureOps";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace vplat
