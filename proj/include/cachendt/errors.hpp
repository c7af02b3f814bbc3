#pragma once

#include <stdexcept>
#include <string>

namespace cachendt {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CACHENDT_DECLARE_ERROR(Name)     \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// Malformed or non-positive arguments.
CACHENDT_DECLARE_ERROR(ArgumentError);
// Index or parameter outside its admissible range.
CACHENDT_DECLARE_ERROR(RangeError);
// mu < 1/M: the collective cache cannot hold the library.
CACHENDT_DECLARE_ERROR(FeasibilityError);
// N < K: no worst-case demand of K distinct files exists.
CACHENDT_DECLARE_ERROR(DemandError);
CACHENDT_DECLARE_ERROR(UnsupportedError);
CACHENDT_DECLARE_ERROR(EmptyInputError);
CACHENDT_DECLARE_ERROR(CoverageError);
// Scheme and cache allocation do not fit together.
CACHENDT_DECLARE_ERROR(CompatibilityError);
CACHENDT_DECLARE_ERROR(SingularChannelError);
CACHENDT_DECLARE_ERROR(AlignmentDegeneracyError);
CACHENDT_DECLARE_ERROR(InsufficientDataError);
CACHENDT_DECLARE_ERROR(SingularH1Error);
// Exact rational arithmetic left the 64-bit range.
CACHENDT_DECLARE_ERROR(OverflowError);

#undef CACHENDT_DECLARE_ERROR

}  // namespace cachendt
