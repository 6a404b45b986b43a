#pragma once

#include <stdexcept>
#include <string>

namespace gle {

/// Process exit codes used by the command-line driver. Each error class maps
/// onto exactly one of these.
enum class ExitCode : int {
  success = 0,
  generic = 1,
  validation = 2,
  fitting = 3,
  stability = 4,
  fdt_infeasible = 5,
  io = 1,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::generic; }
  virtual const char* kind() const noexcept { return "Error"; }
};

// Bad dimensions, non-finite entries, violated preconditions.
class InvalidInput : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
  const char* kind() const noexcept override { return "InvalidInput"; }
};

class NotPositiveSemidefinite : public Error {
 public:
  NotPositiveSemidefinite(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
  const char* kind() const noexcept override { return "NotPositiveSemidefinite"; }

 private:
  double min_eigenvalue_;
};

// A linear operator that must be inverted is (numerically) singular.
class SingularMatrix : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::validation; }
  const char* kind() const noexcept override { return "SingularMatrix"; }
};

class QuadratureError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "QuadratureError"; }
};

class SingularMoment : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::fitting; }
  const char* kind() const noexcept override { return "SingularMoment"; }
};

class SingularSystem : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::fitting; }
  const char* kind() const noexcept override { return "SingularSystem"; }
};

class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double spectral_abscissa)
      : Error(what), spectral_abscissa_(spectral_abscissa) {}
  double spectral_abscissa() const noexcept { return spectral_abscissa_; }
  ExitCode exit_code() const noexcept override { return ExitCode::stability; }
  const char* kind() const noexcept override { return "StabilityError"; }

 private:
  double spectral_abscissa_;
};

class FdtInfeasible : public Error {
 public:
  FdtInfeasible(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  ExitCode exit_code() const noexcept override { return ExitCode::fdt_infeasible; }
  const char* kind() const noexcept override { return "FdtInfeasible"; }

 private:
  double min_eigenvalue_;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
  const char* kind() const noexcept override { return "IoError"; }
};

}  // namespace gle
