#pragma once

#include <stdexcept>
#include <string>

namespace aaetag {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad input data, configuration or usage. The CLI maps these to exit code 2.
class InputError : public Error {
  public:
    using Error::Error;
};

/// A well-formed input on which an analysis could not be completed (exit code 1).
class AnalysisError : public Error {
  public:
    using Error::Error;
};

}  // namespace aaetag
