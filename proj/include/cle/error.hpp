#pragma once

#include <stdexcept>
#include <string>

namespace cle {

// Base of every error raised by the library. The subclasses name the failure
// category used on the command line and in reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDistributionError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace cle
