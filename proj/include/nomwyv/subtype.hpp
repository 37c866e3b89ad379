#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/graphs.hpp"
#include "nomwyv/normalize.hpp"

namespace nomwyv {

inline constexpr std::uint64_t kStepCeiling = 1'000'000;

struct SubtypeOptions {
  bool trace = false;  // keep the derivation tree (disables the negative memo)
  bool memo = true;
  std::uint64_t stepCeiling = kStepCeiling;
};

struct TraceNode {
  std::string rule;
  std::string judgment;
  bool ok = false;
  std::vector<TraceNode> children;
};

struct DerivationTrace {
  std::uint64_t steps = 0;
  bool ceilingHit = false;
  std::optional<TraceNode> tree;
  std::string render() const;
};

struct SubtypeResult {
  bool holds = false;
  DerivationTrace trace;
};

SubtypeResult isSubtype(const Ctx& ctx, const Type& lhs, const Type& rhs, const SubtypeOptions& opts = {});
bool memberSubtype(const Ctx& ctx, const RefinementMember& lhs, const RefinementMember& rhs,
                   const SubtypeOptions& opts = {});
bool refinementSubtype(const Ctx& ctx, const Refinement& lhs, const Refinement& rhs,
                       const SubtypeOptions& opts = {});
// On failure, *failing names the first member of rhs that could not be matched.
SubtypeResult declListSubtype(const Ctx& ctx, const std::vector<MemberDecl>& lhs,
                              const std::vector<MemberDecl>& rhs, const SubtypeOptions& opts = {},
                              std::string* failing = nullptr);

int depth(const Type& ty);
Type expand(const Ctx& ctx, const Type& ty, int d);
Type expand1(const Ctx& ctx, const BaseType& b, int d);
// Expansion wrapper used for every typechecking obligation.
SubtypeResult check(const Ctx& ctx, const Type& lhs, const Type& rhs, const SubtypeOptions& opts = {});

// Diagnostic potential energy of base types and types.
std::uint64_t pathEnergy(const Ctx& ctx, const MeasureTable& mt, const BaseType& b);
std::uint64_t typeEnergy(const Ctx& ctx, const MeasureTable& mt, const Type& ty);

}  // namespace nomwyv
