#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by its inputs.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Open-boundary run reached an edge site: the lattice is undersized.
class LatticeOverflowError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Least-squares fit rejected (too noisy or degenerate).
class FitError : public Error {
 public:
  using Error::Error;
};

// Configuration problem. key() names the offending entry when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace qwalk
