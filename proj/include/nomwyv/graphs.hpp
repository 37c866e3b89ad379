#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/syntax.hpp"

namespace nomwyv {

struct NominalEdge {
  std::string from;  // subtype
  std::string to;    // supertype
  Refinement condition;
};

struct NominalGraph {
  std::vector<std::string> vertices;
  std::vector<NominalEdge> edges;
};

struct SdgNode {
  enum class Kind { Top, Bot, Name, Pseudo };
  Kind kind = Kind::Name;
  std::string name;
  std::string member;  // Pseudo only

  static SdgNode top() { return {Kind::Top, {}, {}}; }
  static SdgNode bot() { return {Kind::Bot, {}, {}}; }
  static SdgNode nameNode(std::string n) { return {Kind::Name, std::move(n), {}}; }
  static SdgNode pseudo(std::string n, std::string t) { return {Kind::Pseudo, std::move(n), std::move(t)}; }
  bool operator==(const SdgNode&) const = default;
  bool operator<(const SdgNode& o) const;
};

std::string toString(const SdgNode& n);

struct SdgEdge {
  SdgNode from;
  SdgNode to;
  std::vector<BaseType> label;
  std::optional<Bound> variance;  // bound of the generating type-member declaration
};

struct SubtypeDependencyGraph {
  std::string partition;  // owning name for per-name partitions; empty otherwise
  std::vector<SdgNode> nodes;
  std::vector<SdgEdge> edges;
};

enum class ViolationKind { ShapeInLowerBound, ShapeUpperNotShape, ShapeRefinedInRefinement, UnguardedCycle };
std::string toString(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string location;
  std::string message;
  SourceSpan span;
  std::vector<SdgNode> cycle;
};

struct SeparationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

struct MeasureTable {
  std::map<SdgNode, std::uint64_t> m;
  std::map<SdgNode, std::uint64_t> a;
  std::map<SdgNode, std::uint64_t> e;
};

NominalGraph buildNominalGraph(const DefTable& delta, const SubtypeTable& sigma);
SubtypeDependencyGraph buildSdg(const DefTable& delta, const SubtypeTable& sigma);

// Is the base type a shape? Path bases are resolved against the owning name's members.
bool isShapeBase(const DefTable& delta, const std::string& owner, const BaseType& b);

SeparationReport checkSyntacticSeparation(const Program& p, const DefTable& delta, const SubtypeTable& sigma);
SeparationReport checkShapeValidity(const SubtypeDependencyGraph& g, const DefTable& delta);
std::vector<SubtypeDependencyGraph> partitionSdg(const SubtypeDependencyGraph& g);

// Throws NomError(DivergentMeasure) on unguarded recursion.
MeasureTable computeMeasures(const DefTable& delta, const SubtypeTable& sigma, const SubtypeDependencyGraph& g);

std::string toDot(const SubtypeDependencyGraph& g);
std::string toDot(const NominalGraph& g);

}  // namespace nomwyv
