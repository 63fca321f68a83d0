#pragma once

#include <stdexcept>
#include <string>

namespace dpmpm {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input files: ragged rows, column order mismatch, bad JSON.
class FormatError : public Error {
public:
  using Error::Error;
};

// Variables or levels that do not agree with a schema.
class SchemaError : public Error {
public:
  using Error::Error;
};

// Inconsistent run settings (m too large, unknown method, bad ranges).
class ConfigError : public Error {
public:
  using Error::Error;
};

// The data cannot be processed as asked, e.g. a record with no allowed
// completion under the structural-zero patterns.
class DataError : public Error {
public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

}  // namespace dpmpm
