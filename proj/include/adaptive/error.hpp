#pragma once

#include <stdexcept>
#include <string>

namespace adaptive {

enum class ErrorCode {
  InvalidArgument,
  Unavailable,
  Corruption,
  Conflict,
  NotEligible,
  Io,
  ChecksumMismatch,
  DegenerateSplit,
  DuplicateClose,
  InsufficientServers,
  InsufficientLocations,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adaptive
