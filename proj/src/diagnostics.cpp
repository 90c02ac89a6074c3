#include "semseq/diagnostics.hpp"

#include <algorithm>
#include <sstream>

namespace semseq {

std::string format(const Diagnostic& d) {
  std::ostringstream out;
  out << (d.severity == Severity::error ? "error" : "warning");
  if (d.line > 0) out << " (line " << d.line << ")";
  out << ": " << d.message;
  return out.str();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  if (diagnostics.empty()) return "validation failed";
  std::string text = format(diagnostics.front());
  if (diagnostics.size() > 1) text += " (+" + std::to_string(diagnostics.size() - 1) + " more)";
  return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace semseq
