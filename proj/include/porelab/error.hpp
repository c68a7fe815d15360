#pragma once

#include <stdexcept>
#include <string>

namespace porelab {

/// Base class of every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PORELAB_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(tag, message) {}   \
  };

PORELAB_DEFINE_ERROR(DimensionError, "dimension")
PORELAB_DEFINE_ERROR(IoError, "io")
PORELAB_DEFINE_ERROR(DegenerateError, "degenerate")
PORELAB_DEFINE_ERROR(CapacityError, "capacity")
PORELAB_DEFINE_ERROR(RangeError, "range")
PORELAB_DEFINE_ERROR(ShapeError, "shape")
PORELAB_DEFINE_ERROR(NumericError, "numeric")
PORELAB_DEFINE_ERROR(FormatError, "format")
PORELAB_DEFINE_ERROR(ValidationError, "validation")
PORELAB_DEFINE_ERROR(NoFlowError, "no_flow")
PORELAB_DEFINE_ERROR(ConvergenceError, "convergence")

#undef PORELAB_DEFINE_ERROR

}  // namespace porelab
