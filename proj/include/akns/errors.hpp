#pragma once

#include <stdexcept>
#include <string>

namespace akns {

/// Base of every error raised by the library. `kind()` is the stable
/// machine-readable name used in CLI reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define AKNS_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  }

AKNS_DEFINE_ERROR(ShapeMismatch);
AKNS_DEFINE_ERROR(CoefficientOverflow);
AKNS_DEFINE_ERROR(StencilOutOfRange);
AKNS_DEFINE_ERROR(GridMismatch);
AKNS_DEFINE_ERROR(ResidualAuxiliarySymbols);
AKNS_DEFINE_ERROR(LambdaOrderResidual);
AKNS_DEFINE_ERROR(PoleAtX);
AKNS_DEFINE_ERROR(UnsupportedOrder);
AKNS_DEFINE_ERROR(DegenerateDispersion);
AKNS_DEFINE_ERROR(ConvergenceViolation);
AKNS_DEFINE_ERROR(OutOfValidatedRange);
AKNS_DEFINE_ERROR(SingularScaling);
AKNS_DEFINE_ERROR(NonPositivePhi);
AKNS_DEFINE_ERROR(InvalidConstraint);
AKNS_DEFINE_ERROR(SingularM);
AKNS_DEFINE_ERROR(PoleAt);
AKNS_DEFINE_ERROR(SingularResolvent);
AKNS_DEFINE_ERROR(TruncationInadmissible);
AKNS_DEFINE_ERROR(SingularA);
AKNS_DEFINE_ERROR(ConfigError);

#undef AKNS_DEFINE_ERROR

}  // namespace akns
