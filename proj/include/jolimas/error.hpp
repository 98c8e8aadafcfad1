#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jolimas {

enum class ErrorCode {
  InvalidArgument,
  OffSurface,
  NotAnEllipse,
  DegenerateInput,
  NotAnEllipsoid,
  StalledWalk,
  NoCrossing,
  Degenerate,
  NoSpecularity,
  BackprojectionMiss,
  ClippedObservation,
  WarpFailed,
  DegenerateConfiguration,
  NoVisibleReflection,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every pipeline failure; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace jolimas
