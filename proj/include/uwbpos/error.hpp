#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uwbpos {

enum class ErrorCode {
  InvalidArgument,
  DegenerateGeometry,
  DegenerateFit,
  InvalidSlope,
  EmptyInput,
  InvalidK,
  NonDividingCellSize,
  OutOfZone,
  ShapeMismatch,
  EmptyDatabase,
  DivergedLoss,
  ZeroBaseline,
  InsufficientData,
  MissingReferencePoint,
  GridMismatch,
  InvalidConfig,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uwbpos
