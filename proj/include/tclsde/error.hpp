#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tclsde {

enum class ErrorCode {
  InvalidArgument = 1,
  HorizonTooShort,
  QuadratureFailure,
  NewtonDivergence,
  LengthMismatch,
  InsufficientData,
  ParseError,
  ValidationError,
  IoError,
  TooManyFailures,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(ErrorCode::ValidationError, join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed";
    for (const auto& s : issues) out += "; " + s;
    return out;
  }
  std::vector<std::string> issues_;
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(std::size_t step_index, const std::string& detail)
      : Error(ErrorCode::NewtonDivergence,
              "Newton iteration diverged at step " + std::to_string(step_index) + ": " + detail),
        step_index_(step_index),
        detail_(detail) {}
  std::size_t step_index() const noexcept { return step_index_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t step_index_;
  std::string detail_;
};

}  // namespace tclsde
