#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/typecheck.hpp"

namespace nomwyv {

struct HeapObject {
  std::string selfVar;
  std::vector<ObjMemberDefn> defs;
  Type ascribed;  // the type written at the allocating new; feeds the inferred StoreEnv
};

// μ. Locations are handed out sequentially from 0, so heaps are append-only.
struct Heap {
  std::map<LocId, HeapObject> objects;

  LocId nextLoc() const { return objects.empty() ? 0 : objects.rbegin()->first + 1; }
  const HeapObject* find(LocId l) const;
  std::size_t size() const { return objects.size(); }
  bool operator==(const Heap& o) const;
};

struct EvalOutcome {
  Heap heap;
  std::optional<LocId> result;  // nullopt is Stuck
  bool stuck() const { return !result.has_value(); }
};

struct BigResult {
  Heap heap;
  LocId loc = 0;
};

// Errors on ill-typed input surface as NomError(Internal).
BigResult evalBig(const Heap& mu, const ExprPtr& e);
EvalOutcome evalFuel(const Heap& mu, const ExprPtr& e, std::uint64_t n);

StoreEnv inferStoreEnv(const Heap& mu);
bool heapWellTyped(const Contexts& c, const StoreEnv& s, const Heap& mu, std::string* why = nullptr);

// The labels of the definitions stored at l, in definition order.
std::vector<std::string> memberLabels(const Heap& mu, LocId l);

}  // namespace nomwyv
