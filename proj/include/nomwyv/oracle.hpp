#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nomwyv/normalize.hpp"
#include "nomwyv/syntax.hpp"

namespace nomwyv {

struct OracleVerdict {
  enum class Kind { Holds, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  int depth = 0;  // depth at which the verdict became definitive

  bool resolved() const { return kind != Kind::Unknown; }
  static OracleVerdict holds(int d) { return {Kind::Holds, d}; }
  static OracleVerdict refuted(int d) { return {Kind::Refuted, d}; }
  static OracleVerdict unknown() { return {Kind::Unknown, 0}; }
};

std::string toString(const OracleVerdict& v);

inline constexpr int kOracleDepth = 8;

// Exposure as a plain recursive judgment, with no environment pre-exposure.
// nullopt when the budget of nested unfoldings runs out.
std::optional<Type> exposeJudgment(const Ctx& ctx, const Type& ty, int budget = 64);

// Breadth-first search over every subtyping rule and Σ alternative, deepening to maxDepth.
OracleVerdict enumerateSubtype(const Ctx& ctx, const Type& lhs, const Type& rhs, int maxDepth = kOracleDepth);

struct GenConfig {
  int maxNames = 4;
  int maxMembersPerName = 3;
  int maxRefinementDepth = 2;
  double shapeProbability = 0.2;
  std::uint64_t seed = 0;
};

// Separated by construction: names form a DAG by index, subtype declarations only point at
// lower-index names, sibling references only point backwards unless a shape guards them,
// and shapes never occur under a lower or exact bound.
Program genProgram(const GenConfig& cfg);

struct GenQuery {
  VarEnv gamma;
  Type lhs;
  Type rhs;
};

// A well-formed environment over p's names plus a query biased towards related types.
GenQuery genQuery(const Program& p, std::mt19937_64& rng, const GenConfig& cfg = {});

// A random type over p's names and the variables of gamma; no self references.
Type genType(const Program& p, const VarEnv& gamma, std::mt19937_64& rng, int depth, bool allowShape = true);

struct FuzzStats {
  std::uint64_t cases = 0;
  std::uint64_t holds = 0;
  std::uint64_t refuted = 0;
  std::uint64_t unknown = 0;
  std::uint64_t agree = 0;
  std::uint64_t disagree = 0;
  std::uint64_t engineTrue = 0;
  std::uint64_t maxSteps = 0;
  std::uint64_t ceilingHits = 0;
  std::uint64_t separationFailures = 0;
  std::uint64_t pipelineErrors = 0;
  std::vector<std::string> disagreements;  // raw, not minimized

  double unknownRate() const { return cases ? static_cast<double>(unknown) / static_cast<double>(cases) : 0.0; }
  std::string report() const;
};

FuzzStats runFuzz(std::uint64_t seed, std::uint64_t cases, int depth = kOracleDepth);

}  // namespace nomwyv
