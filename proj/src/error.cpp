#include "openeye/error.hpp"

namespace openeye {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ManifestUnreadable: return "ManifestUnreadable";
    case Errc::BadLabel: return "BadLabel";
    case Errc::MissingFile: return "MissingFile";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownImage: return "UnknownImage";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::PoolTooSmall: return "PoolTooSmall";
    case Errc::OddTestSize: return "OddTestSize";
    case Errc::WrongStage: return "WrongStage";
    case Errc::UnknownTrialImage: return "UnknownTrialImage";
    case Errc::DuplicateResponse: return "DuplicateResponse";
    case Errc::IncompleteStage: return "IncompleteStage";
    case Errc::MissingLabel: return "MissingLabel";
    case Errc::SessionNotComplete: return "SessionNotComplete";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NoEyes: return "NoEyes";
    case Errc::MissingAnnotation: return "MissingAnnotation";
    case Errc::DecodeFailure: return "DecodeFailure";
    case Errc::BadManifest: return "BadManifest";
    case Errc::MissingExhibit: return "MissingExhibit";
    case Errc::NonContiguousOrder: return "NonContiguousOrder";
    case Errc::OutOfOrderCourse: return "OutOfOrderCourse";
    case Errc::UnknownCourse: return "UnknownCourse";
    case Errc::SequenceConflict: return "SequenceConflict";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::BadRequest: return "BadRequest";
    case Errc::Forbidden: return "Forbidden";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace openeye
