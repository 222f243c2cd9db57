#pragma once

#include <stdexcept>
#include <string>

namespace keystage {

/// Base class for every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or directory the engine was pointed at could not be read.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Input was readable but violates a documented contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Text too small for a metric to be defined (no words, no sentences).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace keystage
