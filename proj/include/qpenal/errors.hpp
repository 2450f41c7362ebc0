#pragma once

#include <stdexcept>

namespace qpenal {

// Invalid argument, malformed input, or violated precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problem too large for exhaustive enumeration or statevector simulation.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Polynomial left with a term of degree > 2 after binary reduction.
class DegreeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qpenal
