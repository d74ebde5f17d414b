#ifndef LCP_ERRORS_H_
#define LCP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace lcp {

// Base of every error raised by the toolkit. Subclasses name the failure
// class so callers (and the CLI) can map them to diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Required column or key missing from an input file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Input rows that parse but violate a data invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class BalanceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Binary container or checkpoint that cannot be read back.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage could not find or accept its upstream artifact.
class StageError : public Error {
 public:
  using Error::Error;
};

class IncompatibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcp

#endif  // LCP_ERRORS_H_
