#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

enum class ErrorCode {
  // network-spec validation
  NonPositiveServiceRate,
  NegativeArrivalRate,
  DimensionMismatch,
  AllZeroArrivalsForSource,
  // permutation algebra
  IndexOutOfRange,
  PreconditionViolated,
  TooLarge,
  // analytic solvers
  InvalidParams,
  DegenerateLambdaBar,
  UnsupportedN,
  SingularSystem,
  StructureMismatch,
  // simulation
  InvalidConfig,
  UnstableGridPoint,
  // optimization
  AllZeroWeights,
  // front end
  UnsupportedRegime,
  ParseError,
  BadRange,
  ModeConflict,
};

/// Library-wide error type. `index` (and `index2`) carry the offending
/// server/source/position when the failure is tied to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int index = -1, int index2 = -1)
      : std::runtime_error(what), code_(code), index_(index), index2_(index2) {}

  ErrorCode code() const noexcept { return code_; }
  int index() const noexcept { return index_; }
  int index2() const noexcept { return index2_; }

 private:
  ErrorCode code_;
  int index_;
  int index2_;
};

}  // namespace aoi
