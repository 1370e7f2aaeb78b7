#pragma once

#include <stdexcept>
#include <string>

namespace isolab {

// Parameter outside its admissible domain (p outside [1,2], a outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// z = 0 passed to a map that divides by a norm of z.
class SingularInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Evaluation at a non-differentiable point; the caller perturbs or skips.
class KinkError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Root-finding or quadrature did not converge, or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request that would exceed a sampler's practical capacity.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isolab
