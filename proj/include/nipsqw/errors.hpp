#pragma once

#include <stdexcept>
#include <string>

namespace nipsqw {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed parameters, out-of-range arguments, bad weights.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical obstruction: singularity, defectiveness, convergence failure.
/// Near the exceptional point these are expected outcomes rather than bugs.
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define NIPSQW_DEFINE_ERROR(Name, Base)           \
  class Name : public Base {                      \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Base(std::string(#Name ": ") + what) {} \
  }

NIPSQW_DEFINE_ERROR(OutOfRange, DomainError);
NIPSQW_DEFINE_ERROR(DegenerateBoundary, DomainError);
NIPSQW_DEFINE_ERROR(BadWeights, DomainError);
NIPSQW_DEFINE_ERROR(ProfileError, DomainError);
NIPSQW_DEFINE_ERROR(NotHermitian, DomainError);
NIPSQW_DEFINE_ERROR(NotAnObservable, DomainError);

NIPSQW_DEFINE_ERROR(SingularMatrix, NumericalError);
NIPSQW_DEFINE_ERROR(NoConvergence, NumericalError);
NIPSQW_DEFINE_ERROR(NotPositiveDefinite, NumericalError);
NIPSQW_DEFINE_ERROR(NotAnEigenvalue, NumericalError);
NIPSQW_DEFINE_ERROR(NoSlope, NumericalError);
NIPSQW_DEFINE_ERROR(DefectiveAtEP, NumericalError);
NIPSQW_DEFINE_ERROR(SingularDyson, NumericalError);
NIPSQW_DEFINE_ERROR(EPProximity, NumericalError);
NIPSQW_DEFINE_ERROR(NonRealNorm, NumericalError);

#undef NIPSQW_DEFINE_ERROR

}  // namespace nipsqw
