#pragma once

#include <string>
#include <vector>

#include "nomwyv/syntax.hpp"

namespace nomwyv {

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  std::string file;
  SourceSpan span;
  Severity severity = Severity::Error;
  std::string code;  // e.g. E0103
  std::string message;
};

std::string toString(Severity s);

// file:line:col: severity[code]: message
std::string render(const Diagnostic& d, bool color = false);
std::string render(const std::vector<Diagnostic>& ds, bool color = false);

}  // namespace nomwyv
