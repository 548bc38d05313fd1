#pragma once

#include <stdexcept>
#include <string>

namespace tsrnn {

// Error categories map one-to-one onto CLI exit codes (see tools/tsrnn_cli.cpp).
enum class ErrorKind {
  Config,     // bad flags, bad config values, unsupported feature combinations
  Data,       // malformed input, gaps, degenerate columns, insufficient history
  Numerical,  // non-finite values, shape/domain violations inside the kernel
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Data:
      return 2;
    case ErrorKind::Numerical:
      return 3;
  }
  return 3;
}

}  // namespace tsrnn
