#pragma once

#include <stdexcept>
#include <string>

namespace phonosearch {

// Base of every error the library throws on purpose. Anything else escaping
// the library (std::bad_alloc and friends) is an internal failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied bad input: wrong arity, malformed values, unknown table.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// The filesystem refused a read or write. Kept apart from ValidationError so
// the service can answer 500 instead of 400.
class StorageError : public Error {
 public:
  using Error::Error;
};

// Inconsistent setup, e.g. two tables registered under one id.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace phonosearch
