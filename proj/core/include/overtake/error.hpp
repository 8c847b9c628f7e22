#pragma once

#include <stdexcept>
#include <string>

namespace overtake {

// Every failure surfaced by the library derives from Error. The subclass names
// the category; the CLI maps categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class UnderfullError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or corrupted file contents (bad magic, checksum, dimensions).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace overtake
