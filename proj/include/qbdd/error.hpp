#pragma once

#include <stdexcept>
#include <string>

namespace qbdd {

// Exit-code classes shared by the library and the command-line front end.
enum class ErrorKind { precondition = 2, budget = 3, verification = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error(ErrorKind::precondition, what) {}
};

class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& what)
      : Error(ErrorKind::budget, what) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what)
      : Error(ErrorKind::verification, what) {}
};

}  // namespace qbdd
