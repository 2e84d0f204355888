#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotSymmetric,
  NotOrthonormal,
  LinearAlgebra,
  InfeasibleManifold,
  FaceIsZero,
  NoStall,
  InfeasiblePoint,
  IndefiniteDual,
  SolverFailure,
  Inconclusive,
  Io,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for everything thrown by the library. The code maps 1:1
/// onto the C API status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace spectra
