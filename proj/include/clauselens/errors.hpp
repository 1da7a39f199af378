#pragma once

#include <stdexcept>
#include <string>

namespace clauselens {

/// Base class for all library errors. `kind()` names the error class used
/// for CLI exit codes and log lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config-error", m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error("parse-error", m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error("domain-error", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric-error", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io-error", m) {}
};

/// Contract violations (preconditions broken by calling code).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error("contract-error", m) {}
};

}  // namespace clauselens
