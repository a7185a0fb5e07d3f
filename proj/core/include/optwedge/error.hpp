#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optwedge {

enum class ErrorKind {
  Domain,            // argument outside the mathematical domain
  Validation,        // well-formed input carrying invalid values
  Parse,             // malformed file content
  Io,                // missing or unreadable file
  InsufficientData,
  DegenerateSample,  // singular covariance and friends
  Fit,
  State,             // object used before it was fitted/initialised
  Infeasible,
  Numerical,
  Version,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace optwedge
