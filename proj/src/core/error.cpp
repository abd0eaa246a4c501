#include "sdcps/core/error.hpp"

namespace sdcps {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PastEvent: return "PastEvent";
    case ErrorCode::Drained: return "Drained";
    case ErrorCode::InvalidPriority: return "InvalidPriority";
    case ErrorCode::InvalidTtl: return "InvalidTtl";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::TooManyPartitions: return "TooManyPartitions";
    case ErrorCode::NoSuchEdge: return "NoSuchEdge";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::NoCenters: return "NoCenters";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotObservable: return "NotObservable";
    case ErrorCode::MissingNeighborEstimate: return "MissingNeighborEstimate";
    case ErrorCode::UncoveredPlant: return "UncoveredPlant";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::DeadController: return "DeadController";
    case ErrorCode::DuplicateDevice: return "DuplicateDevice";
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::ImageMismatch: return "ImageMismatch";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Saturated: return "Saturated";
    case ErrorCode::Expired: return "Expired";
    case ErrorCode::Unsynchronized: return "Unsynchronized";
    case ErrorCode::StaleTrack: return "StaleTrack";
    case ErrorCode::NoSibling: return "NoSibling";
    case ErrorCode::DuplicateController: return "DuplicateController";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NoKey: return "NoKey";
    case ErrorCode::AlreadyPrevented: return "AlreadyPrevented";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EstablishFailure: return "EstablishFailure";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::UnknownVerb: return "UnknownVerb";
    case ErrorCode::MissingFlag: return "MissingFlag";
    case ErrorCode::BadValue: return "BadValue";
  }
  return "Unknown";
}

}  // namespace sdcps
