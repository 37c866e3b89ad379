#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nomwyv/diagnostics.hpp"
#include "nomwyv/syntax.hpp"

namespace nomwyv {

struct SourceFile {
  std::string path;
  std::string text;
};

struct ParseResult {
  Program program;
  std::vector<AssertDirective> asserts;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

// Parses a whole program. Runs ANF validation but not multi-parameter desugaring.
ParseResult parseProgram(const SourceFile& src);

// Parses declarations and asserts only (prelude files). A trailing expression is an error.
ParseResult parseDeclarations(const SourceFile& src);

// Parses a standalone type, for CLI queries.
std::optional<Type> parseType(const std::string& text, std::vector<Diagnostic>* diags = nullptr);

std::vector<Diagnostic> validateAnf(const Program& p, const std::string& file = {});

// Rewrites n-ary (n != 1) methods into unary methods over generated record types.
// Problems that make a rewrite impossible are appended to diags when given.
Program desugarMultiParams(const Program& p, std::vector<Diagnostic>* diags = nullptr,
                           const std::string& file = {});

}  // namespace nomwyv
