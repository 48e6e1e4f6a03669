#pragma once

#include <stdexcept>
#include <string>

namespace helmest {

// Base of every failure the library reports; `kind()` is the stable name used
// in reports and diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define HELMEST_ERROR(Name)                                                 \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(#Name, what) {}          \
  };

HELMEST_ERROR(ConfigError)
HELMEST_ERROR(Trapped)
HELMEST_ERROR(ConditionsFailed)
HELMEST_ERROR(NonSymmetric)
HELMEST_ERROR(OriginPoint)
HELMEST_ERROR(OriginSample)
HELMEST_ERROR(SurfaceProximity)
HELMEST_ERROR(MissingDerivative)
HELMEST_ERROR(DegenerateNormal)
HELMEST_ERROR(TruncatedTail)
HELMEST_ERROR(QuadratureUnresolved)
HELMEST_ERROR(NoConvergence)
HELMEST_ERROR(SingularAssembly)
HELMEST_ERROR(FormatError)

#undef HELMEST_ERROR

}  // namespace helmest
