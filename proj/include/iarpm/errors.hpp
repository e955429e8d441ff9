#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iarpm {

enum class ErrorCode {
  kInput,
  kDegenerateConfiguration,
  kInfeasibleCardinality,
  kDegenerateGeometry,
  kOutsideConcavityRegion,
  kOracleTooLarge,
  kInteriorPointInvalid,
  kNotExtendable,
  kIllConditionedSimplex,
  kNoOpCut,
  kDegenerateVertex,
  kDegenerateFeasibleRegion,
  kInvalidSpec,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the solver loop, the CLI) can branch on the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iarpm
