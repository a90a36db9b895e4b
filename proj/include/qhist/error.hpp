#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qhist {

enum class ErrorCode {
  NotHermitian,
  DegenerateSpectrum,
  DimensionMismatch,
  InvalidArgument,
  ImpulseOutOfRange,
  LengthMismatch,
  CapExceeded,
  QuadratureBudgetExceeded,
  AllZeroSubstates,
  NyquistViolation,
  GridTooSmall,
  GridMismatch,
  FineFieldNotNormalizable,
  EmptyRecordSet,
  ImpulseNotSquareIntegrable,
  NonPositiveAlpha,
  ConfigInvalid,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code; the
// experiment runner maps codes onto process exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qhist
