#pragma once

#include <stdexcept>
#include <string>

namespace parrot {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or schema (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File-system failure (CLI exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Transport or protocol failure talking to a remote endpoint (CLI exit code 2).
class EndpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace parrot
