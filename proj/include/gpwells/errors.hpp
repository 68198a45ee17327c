#pragma once

#include <stdexcept>
#include <string>

namespace gpwells {

/// Base of every error thrown by the library. `kind()` is a stable token used
/// by the CLI's machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ConfigurationError : Error {
  explicit ConfigurationError(const std::string& w) : Error("configuration", w) {}
};

struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error("resolution", w) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error("geometry", w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error("numeric", w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};

struct GridMismatchError : Error {
  explicit GridMismatchError(const std::string& w) : Error("grid-mismatch", w) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error("format", w) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& w) : Error("solver", w) {}
};

struct NotApplicableError : Error {
  explicit NotApplicableError(const std::string& w) : Error("not-applicable", w) {}
};

/// Non-finite state in the radial shooting integrator.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& w, double last_r)
      : Error("integration", w), last_r_(last_r) {}
  double last_valid_r() const noexcept { return last_r_; }

 private:
  double last_r_;
};

}  // namespace gpwells
