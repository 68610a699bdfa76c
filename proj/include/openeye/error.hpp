#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace openeye {

/// Error codes shared by every module. Each code names one failure kind from
/// the platform's error taxonomy; the HTTP layer maps them onto status codes.
enum class Errc {
  // image-pool
  ManifestUnreadable,
  BadLabel,
  MissingFile,
  DuplicateId,
  UnknownImage,
  DigestMismatch,
  // study-engine
  PoolTooSmall,
  OddTestSize,
  WrongStage,
  UnknownTrialImage,
  DuplicateResponse,
  IncompleteStage,
  MissingLabel,
  SessionNotComplete,
  // pupil-forensics
  EmptyMask,
  InsufficientPoints,
  DegenerateConfiguration,
  DimensionMismatch,
  NoEyes,
  MissingAnnotation,
  DecodeFailure,
  // tutorial-content
  BadManifest,
  MissingExhibit,
  NonContiguousOrder,
  OutOfOrderCourse,
  UnknownCourse,
  // study-service
  SequenceConflict,
  StorageFailure,
  UnknownSession,
  BadRequest,
  Forbidden,
  BadConfig,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace openeye
