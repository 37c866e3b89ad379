#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nomwyv/errors.hpp"
#include "nomwyv/syntax.hpp"

namespace nomwyv {

inline constexpr int kDefaultAvoidFuel = 16;

// Typing context. Immutable in spirit: push() returns an extended copy. Every Γ entry is
// exposed once when pushed, so exposure never re-walks the environment (exposeEnv memoized
// per environment prefix).
class Ctx {
 public:
  Ctx();
  Ctx(std::shared_ptr<const DefTable> delta, std::shared_ptr<const SubtypeTable> sigma);

  const DefTable& delta() const { return *delta_; }
  const SubtypeTable& sigma() const { return *sigma_; }
  const VarEnv& gamma() const { return gamma_; }
  const std::vector<Type>& exposedGamma() const { return exposed_; }
  const StoreEnv& store() const { return *store_; }
  std::shared_ptr<const DefTable> deltaPtr() const { return delta_; }
  std::shared_ptr<const SubtypeTable> sigmaPtr() const { return sigma_; }

  Ctx push(const std::string& x, const Type& ty) const;
  Ctx withStore(std::shared_ptr<const StoreEnv> s) const;

  // 1-based index of x in Γ, or 0.
  std::size_t indexOf(const std::string& x) const;
  bool hasVar(const std::string& x) const { return indexOf(x) != 0; }
  std::set<std::string> varNames() const;
  const NameDef* def(const std::string& n) const;

  int avoidFuel = kDefaultAvoidFuel;

 private:
  std::shared_ptr<const DefTable> delta_;
  std::shared_ptr<const SubtypeTable> sigma_;
  std::shared_ptr<const StoreEnv> store_;
  VarEnv gamma_;
  std::vector<Type> exposed_;
};

// Counts Exp-Upper unfoldings, for the exposure step bound.
struct ExposeMeter {
  std::uint64_t steps = 0;
};

Type typePath(const Ctx& ctx, const Path& p);

MemberDecl lookupDecl(const Ctx& ctx, const Type& ty, const Path& p, const std::string& label);
std::optional<MemberDecl> tryLookupDecl(const Ctx& ctx, const Type& ty, const Path& p,
                                        const std::string& label);

Type expose(const Ctx& ctx, const Type& ty, ExposeMeter* meter = nullptr);
// expose1 against an explicitly exposed environment (Γ entries already exposed).
Type expose1(const Ctx& ctx, const std::vector<Type>& exposedGamma, const Type& ty,
             ExposeMeter* meter = nullptr);
std::vector<Type> exposeEnv(const Ctx& base, const VarEnv& gamma);

// Single-step unfoldings; nullopt when the Otherwise rule applies.
std::optional<Type> tryUpcast(const Ctx& ctx, const Type& ty);
std::optional<Type> tryDowncast(const Ctx& ctx, const Type& ty);
Type upcast(const Ctx& ctx, const Type& ty);
Type downcast(const Ctx& ctx, const Type& ty);

std::optional<Bound> boundJoin(Bound a, Bound b);
Bound boundJoinOrThrow(Bound a, Bound b);
Bound boundProduct(Bound a, Bound b);

struct AvoidResult {
  Type ty;
  Bound achieved = Bound::EQ;
};

// Throws NomError with FuelExhausted, IncompatibleBounds or AvoidFailure.
AvoidResult avoid(const Ctx& ctx, const Type& ty, const std::string& x, Bound want, int fuel);
AvoidResult avoid(const Ctx& ctx, const Type& ty, const std::string& x, Bound want);

std::size_t rank(const VarEnv& gamma, const std::string& x);
std::size_t rank(const VarEnv& gamma, const Path& p);
std::size_t rank(const VarEnv& gamma, const Type& ty);
std::size_t headRank(const VarEnv& gamma, const Type& ty);
bool envWellFormed(const VarEnv& gamma);

}  // namespace nomwyv
