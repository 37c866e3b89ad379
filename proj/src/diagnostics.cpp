#include "nomwyv/diagnostics.hpp"

namespace nomwyv {

std::string toString(Severity s) {
  switch (s) {
    case Severity::Error:
      return "error";
    case Severity::Warning:
      return "warning";
    case Severity::Note:
      return "note";
  }
  return "error";
}

std::string render(const Diagnostic& d, bool color) {
  std::string sev = toString(d.severity);
  if (color) {
    const char* c = d.severity == Severity::Error ? "\x1b[1;31m" : "\x1b[1;33m";
    sev = std::string(c) + sev + "\x1b[0m";
  }
  std::string s = d.file.empty() ? "<input>" : d.file;
  s += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": " + sev;
  if (!d.code.empty()) s += "[" + d.code + "]";
  return s + ": " + d.message;
}

std::string render(const std::vector<Diagnostic>& ds, bool color) {
  std::string s;
  for (const auto& d : ds) s += render(d, color) + "\n";
  return s;
}

}  // namespace nomwyv
