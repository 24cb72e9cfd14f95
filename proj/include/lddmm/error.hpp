#pragma once

#include <stdexcept>
#include <string>

namespace lddmm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// The constraint Gram matrix could not be factored even after regularization.
class SingularConstraint : public Error {
 public:
  SingularConstraint(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A state coordinate became non-finite or exceeded the blow-up threshold.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Malformed or schema-violating input file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace lddmm
