#pragma once

#include <stdexcept>
#include <string>

namespace nomwyv {

enum class ErrorKind {
  UnboundPath,
  NoSuchMember,
  LookupOnPathBase,
  SubtypeFailure,
  InvalidType,
  BadSubtypeDecl,
  AvoidFailure,
  DuplicateName,
  FuelExhausted,
  IncompatibleBounds,
  DivergentMeasure,
  StepLimit,
  Internal,
};

std::string toString(ErrorKind k);

class NomError : public std::runtime_error {
 public:
  NomError(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nomwyv
