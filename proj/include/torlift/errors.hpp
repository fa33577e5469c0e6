#pragma once

#include <stdexcept>
#include <string>

namespace torlift {

// Every library failure derives from Error so the CLI can map it to an
// input-error exit code in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TORLIFT_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  };

TORLIFT_DEFINE_ERROR(DimensionError)
TORLIFT_DEFINE_ERROR(InvariantError)
TORLIFT_DEFINE_ERROR(IncompleteCocycle)
TORLIFT_DEFINE_ERROR(DisconnectedNerve)
TORLIFT_DEFINE_ERROR(NoCorrection)
TORLIFT_DEFINE_ERROR(OutOfModel)
TORLIFT_DEFINE_ERROR(AssemblyError)
TORLIFT_DEFINE_ERROR(InvalidSigma)
TORLIFT_DEFINE_ERROR(ReconstructionError)
TORLIFT_DEFINE_ERROR(NotOnSpace)
TORLIFT_DEFINE_ERROR(InputError)

#undef TORLIFT_DEFINE_ERROR

}  // namespace torlift
