#pragma once

#include <stdexcept>
#include <string>

namespace nystromite {

/// Machine-checkable failure reasons raised by the library.
enum class ErrorCode {
  NonConvergence,
  ZeroEigenvalue,
  ComplexSpectrum,
  DefectiveEigenbasis,
  SingularSample,
  NegativeEigenvalue,
  NoRealSquareRoot,
  AsymmetricInput,
  PsdViolation,
  DegenerateSampling,
  DegenerateDataset,
  ParseError,
  IoError,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Exception type carrying an ErrorCode alongside the human-readable message.
class NystromError : public std::runtime_error {
 public:
  NystromError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw NystromError(code, std::string(to_string(code)) + ": " + message);
}

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::ZeroEigenvalue: return "zero eigenvalue";
    case ErrorCode::ComplexSpectrum: return "complex spectrum";
    case ErrorCode::DefectiveEigenbasis: return "defective eigenbasis";
    case ErrorCode::SingularSample: return "singular sample block";
    case ErrorCode::NegativeEigenvalue: return "negative eigenvalue";
    case ErrorCode::NoRealSquareRoot: return "no real square root";
    case ErrorCode::AsymmetricInput: return "asymmetric input";
    case ErrorCode::PsdViolation: return "positive semidefiniteness violated";
    case ErrorCode::DegenerateSampling: return "degenerate sampling distribution";
    case ErrorCode::DegenerateDataset: return "degenerate dataset";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::IoError: return "i/o error";
    case ErrorCode::InvalidArgument: return "invalid argument";
  }
  return "unknown error";
}

}  // namespace nystromite
