#pragma once

#include <stdexcept>
#include <string>

namespace ndac {

/// A (phi, f) pair that violates the admissibility conditions.
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure produced non-finite values or lost stability.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ndac
