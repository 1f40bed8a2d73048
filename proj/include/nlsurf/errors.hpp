#pragma once

#include <stdexcept>
#include <string>

namespace nlsurf {

// Bad arguments: out-of-range parameters, malformed bond indices, wrong boundary type.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested computation exceeds a configured feasibility cap (enumeration size,
// quadrature grid). Callers are expected to switch method (disorder MC, spin MCMC).
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlsurf
