#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace liftguard {

enum class ErrorCode {
  NonPositiveDepth,
  NonOrthonormalRotation,
  InvalidArgument,
  EmptyCloud,
  UnorderedStream,
  MissingFrame,
  ZeroGroundTruth,
  NoClasses,
  TooFewSamples,
  EmptySamples,
  LengthMismatch,
  EmptyTrack,
  InvalidSpec,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; `code()` lets callers
// branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace liftguard
