#include "uwbpos/error.hpp"

namespace uwbpos {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidSlope: return "InvalidSlope";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::NonDividingCellSize: return "NonDividingCellSize";
    case ErrorCode::OutOfZone: return "OutOfZone";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MissingReferencePoint: return "MissingReferencePoint";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace uwbpos
