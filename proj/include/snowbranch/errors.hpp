#pragma once

#include <stdexcept>
#include <string>

namespace snowbranch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad level, inconsistent window, malformed config file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was violated (asymmetric grid, non-closed stabilizer,
/// unmatched symmetry class). These indicate a bug or a broken cache file.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace snowbranch
