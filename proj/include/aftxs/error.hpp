#pragma once

#include <stdexcept>
#include <string>

namespace aftxs {

/// Failure categories shared by the C++ core and the C API.
enum class ErrorCode {
  kInvalidArgument = 1,  // malformed input, schema mismatch
  kModel = 2,            // regularity condition violated
  kNumerical = 3,        // quadrature / iteration did not converge, singular matrix
  kNoRoot = 4,           // estimating equation has no root
  kNoSolution = 5,       // moment equation outside the range of the mean map
  kDomain = 6,           // evaluation outside the support of a function
  kIo = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define AFTXS_DEFINE_ERROR(Name, Code)                                        \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  }

AFTXS_DEFINE_ERROR(InvalidArgument, kInvalidArgument);
AFTXS_DEFINE_ERROR(ModelError, kModel);
AFTXS_DEFINE_ERROR(NumericalError, kNumerical);
AFTXS_DEFINE_ERROR(NoRootError, kNoRoot);
AFTXS_DEFINE_ERROR(NoSolutionError, kNoSolution);
AFTXS_DEFINE_ERROR(DomainError, kDomain);
AFTXS_DEFINE_ERROR(IoError, kIo);

#undef AFTXS_DEFINE_ERROR

}  // namespace aftxs
