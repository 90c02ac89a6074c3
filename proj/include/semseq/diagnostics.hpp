#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semseq {

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  int line = 0;  // 1-based source line, 0 when not tied to a line
  std::string message;
};

std::string format(const Diagnostic& d);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

// Input failed validation. Carries every problem found, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameter combination or value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace semseq
