#pragma once

#include <stdexcept>
#include <string>

namespace casegment {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file: bad header, payload size mismatch, bad magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed file using a feature this library does not read.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation does not hold for the given data.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace casegment
