#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Base of every error the library throws on bad input or impossible states.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside its mathematical domain (rate > 1, singular analytic point, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid object (non-unitary gate, incomplete Kraus set, unsorted spectrum, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operation needs a different number of Kraus operators than supplied.
class ArityError : public Error {
 public:
  using Error::Error;
};

// Dense export or oracle requested beyond its size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A committed branch had probability below the commit threshold.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

// Bond spectrum queried while stale; call canonicalize() first.
class StaleSpectrumError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtraj
