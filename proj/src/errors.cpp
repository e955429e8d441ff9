#include "iarpm/errors.hpp"

namespace iarpm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInput: return "InputError";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kInfeasibleCardinality: return "InfeasibleCardinality";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kOutsideConcavityRegion: return "OutsideConcavityRegion";
    case ErrorCode::kOracleTooLarge: return "OracleTooLarge";
    case ErrorCode::kInteriorPointInvalid: return "InteriorPointInvalid";
    case ErrorCode::kNotExtendable: return "NotExtendable";
    case ErrorCode::kIllConditionedSimplex: return "IllConditionedSimplex";
    case ErrorCode::kNoOpCut: return "NoOpCut";
    case ErrorCode::kDegenerateVertex: return "DegenerateVertex";
    case ErrorCode::kDegenerateFeasibleRegion: return "DegenerateFeasibleRegion";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
  }
  return "Error";
}

}  // namespace iarpm
