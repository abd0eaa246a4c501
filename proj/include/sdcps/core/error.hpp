#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdcps {

/// Every failure the library reports carries one of these codes so callers
/// (and tests) can branch on the class of error without parsing messages.
enum class ErrorCode {
  // core
  PastEvent,
  Drained,
  InvalidPriority,
  InvalidTtl,
  // topology
  InvalidCount,
  UnknownNode,
  TooManyPartitions,
  NoSuchEdge,
  DuplicateEdge,
  NoCenters,
  // plant
  DimensionMismatch,
  NotObservable,
  MissingNeighborEstimate,
  UncoveredPlant,
  // control plane
  Unreachable,
  DeadController,
  DuplicateDevice,
  UnknownDevice,
  ImageMismatch,
  NotFound,
  Saturated,
  // middleware
  Expired,
  Unsynchronized,
  StaleTrack,
  NoSibling,
  DuplicateController,
  UnknownEndpoint,
  // security
  InvalidSpec,
  NoKey,
  AlreadyPrevented,
  InvalidTransition,
  // setup and scenarios
  ConfigInvalid,
  EstablishFailure,
  EmptyReport,
  // cli
  UnknownVerb,
  MissingFlag,
  BadValue,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sdcps
