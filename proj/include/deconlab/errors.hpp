#pragma once

#include <stdexcept>
#include <string>

namespace deconlab {

/// Base of every error the library throws. The C API maps subclasses to
/// status codes; anything else becomes a runtime error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad names, malformed documents, violated preconditions on inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that a fitter cannot handle (e.g. a zero-variance column).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Closed-form effect requested on a model that has no closed form.
class UnsupportedAnalyticError : public Error {
 public:
  using Error::Error;
};

}  // namespace deconlab
