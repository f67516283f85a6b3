#pragma once

#include <stdexcept>

namespace lerw {

// Raised when a request exceeds a configured size limit (exact-arithmetic cap,
// memory budget, step budget).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a recomputed quantity disagrees with its reference value.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lerw
