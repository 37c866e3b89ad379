#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/diagnostics.hpp"
#include "nomwyv/normalize.hpp"
#include "nomwyv/subtype.hpp"

namespace nomwyv {

struct TypeError {
  ErrorKind kind = ErrorKind::Internal;
  SourceSpan span;
  std::string message;
  std::optional<Type> expected;
  std::optional<Type> actual;
  std::optional<DerivationTrace> trace;
};

std::string errorCode(ErrorKind k);
Diagnostic toDiagnostic(const TypeError& e, const std::string& file, bool withTrace = false);

class TypeCheckError : public std::exception {
 public:
  explicit TypeCheckError(TypeError e) : err_(std::move(e)) {}
  const TypeError& error() const { return err_; }
  const char* what() const noexcept override { return err_.message.c_str(); }

 private:
  TypeError err_;
};

struct CheckOptions {
  bool trace = false;
  int avoidFuel = kDefaultAvoidFuel;
};

struct Contexts {
  std::shared_ptr<const DefTable> delta;
  std::shared_ptr<const SubtypeTable> sigma;
};

struct CheckedProgram {
  Program program;
  Contexts ctx;
  Type mainType;
};

struct CheckResult {
  std::optional<CheckedProgram> checked;
  std::vector<TypeError> errors;
  bool ok() const { return errors.empty() && checked.has_value(); }
};

// Δ and Σ verbatim from the declarations. Duplicate names are appended to errs.
Contexts buildContexts(const Program& p, std::vector<TypeError>* errs = nullptr);
Ctx makeCtx(const Contexts& c, const CheckOptions& opts = {});

// Every referenced type name must be declared.
std::vector<TypeError> resolveNames(const Program& p, const DefTable& delta,
                                    const std::vector<AssertDirective>& asserts = {});

std::optional<TypeError> checkSubtypeDecl(const Ctx& ctx, const SubtypeEntry& entry, SourceSpan span = {});

// The functions below throw TypeCheckError.
void typeValid(const Ctx& ctx, const Type& ty, SourceSpan span = {});
Type typeExpr(const Ctx& ctx, const ExprPtr& e, const CheckOptions& opts = {});
void typeObjDefn(const Ctx& ctx, const std::string& selfVar, const std::vector<ObjMemberDefn>& defs,
                 const Type& ascribed, SourceSpan span = {}, const CheckOptions& opts = {});

CheckResult checkProgram(const Program& p, const CheckOptions& opts = {});

}  // namespace nomwyv
