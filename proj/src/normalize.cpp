#include "nomwyv/normalize.hpp"

#include <algorithm>

namespace nomwyv {

std::string toString(ErrorKind k) {
  switch (k) {
    case ErrorKind::UnboundPath: return "UnboundPath";
    case ErrorKind::NoSuchMember: return "NoSuchMember";
    case ErrorKind::LookupOnPathBase: return "LookupOnPathBase";
    case ErrorKind::SubtypeFailure: return "SubtypeFailure";
    case ErrorKind::InvalidType: return "InvalidType";
    case ErrorKind::BadSubtypeDecl: return "BadSubtypeDecl";
    case ErrorKind::AvoidFailure: return "AvoidFailure";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::FuelExhausted: return "FuelExhausted";
    case ErrorKind::IncompatibleBounds: return "IncompatibleBounds";
    case ErrorKind::DivergentMeasure: return "DivergentMeasure";
    case ErrorKind::StepLimit: return "StepLimit";
    case ErrorKind::Internal: return "Internal";
  }
  return "Internal";
}

Ctx::Ctx()
    : delta_(std::make_shared<DefTable>()),
      sigma_(std::make_shared<SubtypeTable>()),
      store_(std::make_shared<StoreEnv>()) {}

Ctx::Ctx(std::shared_ptr<const DefTable> delta, std::shared_ptr<const SubtypeTable> sigma)
    : delta_(std::move(delta)), sigma_(std::move(sigma)), store_(std::make_shared<StoreEnv>()) {}

Ctx Ctx::push(const std::string& x, const Type& ty) const {
  Type ex = expose1(*this, exposed_, ty);
  Ctx out = *this;
  out.gamma_.emplace_back(x, ty);
  out.exposed_.push_back(std::move(ex));
  return out;
}

Ctx Ctx::withStore(std::shared_ptr<const StoreEnv> s) const {
  Ctx out = *this;
  out.store_ = std::move(s);
  return out;
}

std::size_t Ctx::indexOf(const std::string& x) const {
  for (std::size_t i = gamma_.size(); i > 0; --i)
    if (gamma_[i - 1].first == x) return i;
  return 0;
}

std::set<std::string> Ctx::varNames() const {
  std::set<std::string> out;
  for (const auto& [x, _] : gamma_) out.insert(x);
  return out;
}

const NameDef* Ctx::def(const std::string& n) const {
  auto it = delta_->find(n);
  return it == delta_->end() ? nullptr : &it->second;
}

Type typePath(const Ctx& ctx, const Path& p) {
  if (p.isVar()) {
    std::size_t i = ctx.indexOf(p.var);
    if (!i) throw NomError(ErrorKind::UnboundPath, "unbound variable '" + p.var + "'");
    return ctx.gamma()[i - 1].second;
  }
  auto it = ctx.store().find(p.loc);
  if (it == ctx.store().end())
    throw NomError(ErrorKind::UnboundPath, "unbound location " + toString(p));
  return it->second;
}

std::optional<MemberDecl> tryLookupDecl(const Ctx& ctx, const Type& ty, const Path& p,
                                        const std::string& label) {
  if (!ty.isRefined()) return std::nullopt;
  // Look-Refine: refinement members are returned as-is
  if (const auto* m = ty.refinement.find(label)) return MemberDecl::typeMember(m->label, m->bound, m->ty);
  if (!ty.base.isNamed()) return std::nullopt;
  // Look-Name: σ[x_n := p]
  const NameDef* d = ctx.def(ty.base.name);
  if (!d) return std::nullopt;
  for (const auto& m : d->members)
    if (m.label == label) return substPath(m, d->selfVar, p);
  return std::nullopt;
}

MemberDecl lookupDecl(const Ctx& ctx, const Type& ty, const Path& p, const std::string& label) {
  if (!ty.isRefined())
    throw NomError(ErrorKind::NoSuchMember, "type " + toString(ty) + " has no member '" + label + "'");
  if (auto d = tryLookupDecl(ctx, ty, p, label)) return *d;
  if (!ty.base.isNamed())
    throw NomError(ErrorKind::LookupOnPathBase,
                   "cannot look up '" + label + "' on path type " + toString(ty) + " without exposing it");
  throw NomError(ErrorKind::NoSuchMember, "type " + toString(ty) + " has no member '" + label + "'");
}

namespace {

thread_local int exposeDepth = 0;
constexpr int kExposeDepthLimit = 4096;

struct DepthGuard {
  DepthGuard() {
    if (++exposeDepth > kExposeDepthLimit) {
      exposeDepth = 0;
      throw NomError(ErrorKind::Internal, "exposure exceeded its recursion limit");
    }
  }
  ~DepthGuard() {
    if (exposeDepth > 0) --exposeDepth;
  }
};

std::optional<Type> exposedTypeOf(const Ctx& ctx, const std::vector<Type>& exposedGamma, const Path& p,
                                  ExposeMeter* meter) {
  if (p.isVar()) {
    std::size_t i = ctx.indexOf(p.var);
    if (!i || i > exposedGamma.size()) return std::nullopt;
    return exposedGamma[i - 1];
  }
  auto it = ctx.store().find(p.loc);
  if (it == ctx.store().end()) return std::nullopt;
  return expose1(ctx, exposedGamma, it->second, meter);
}

}  // namespace

Type expose1(const Ctx& ctx, const std::vector<Type>& exposedGamma, const Type& ty, ExposeMeter* meter) {
  // Exp-Top, Exp-Bot, Exp-Name
  if (!ty.isPathSel()) return ty;
  DepthGuard guard;
  const Path& p = ty.base.path;
  auto tp = exposedTypeOf(ctx, exposedGamma, p, meter);
  if (!tp) return ty;
  auto d = tryLookupDecl(ctx, *tp, p, ty.base.label);
  // Exp-Upper: follow LE/EQ bounds, merging the original refinement on the right
  if (d && d->kind == MemberDecl::Kind::TypeMember && d->bound != Bound::GE) {
    if (meter) ++meter->steps;
    return withRefinement(expose1(ctx, exposedGamma, d->ty, meter), ty.refinement);
  }
  return ty;  // Exp-Otherwise
}

Type expose(const Ctx& ctx, const Type& ty, ExposeMeter* meter) {
  return expose1(ctx, ctx.exposedGamma(), ty, meter);
}

std::vector<Type> exposeEnv(const Ctx& base, const VarEnv& gamma) {
  Ctx c(base.deltaPtr(), base.sigmaPtr());
  c = c.withStore(std::make_shared<StoreEnv>(base.store()));
  for (const auto& [x, ty] : gamma) c = c.push(x, ty);
  return c.exposedGamma();
}

namespace {

std::optional<MemberDecl> pathMember(const Ctx& ctx, const Type& ty) {
  if (!ty.isPathSel()) return std::nullopt;
  const Path& p = ty.base.path;
  Type tp;
  try {
    tp = typePath(ctx, p);
  } catch (const NomError&) {
    return std::nullopt;
  }
  auto d = tryLookupDecl(ctx, expose(ctx, tp), p, ty.base.label);
  if (!d || d->kind != MemberDecl::Kind::TypeMember) return std::nullopt;
  return d;
}

}  // namespace

std::optional<Type> tryUpcast(const Ctx& ctx, const Type& ty) {
  auto d = pathMember(ctx, ty);
  if (!d || d->bound == Bound::GE) return std::nullopt;
  return withRefinement(d->ty, ty.refinement);  // Uc-Upper
}

std::optional<Type> tryDowncast(const Ctx& ctx, const Type& ty) {
  auto d = pathMember(ctx, ty);
  if (!d || d->bound == Bound::LE) return std::nullopt;
  return withRefinement(d->ty, ty.refinement);  // Dc-Lower
}

Type upcast(const Ctx& ctx, const Type& ty) { return tryUpcast(ctx, ty).value_or(ty); }
Type downcast(const Ctx& ctx, const Type& ty) { return tryDowncast(ctx, ty).value_or(ty); }

std::optional<Bound> boundJoin(Bound a, Bound b) {
  if (a == Bound::EQ) return b;
  if (b == Bound::EQ) return a;
  if (a == b) return a;
  return std::nullopt;
}

Bound boundJoinOrThrow(Bound a, Bound b) {
  if (auto j = boundJoin(a, b)) return *j;
  throw NomError(ErrorKind::IncompatibleBounds,
                 "bounds " + toString(a) + " and " + toString(b) + " have no join");
}

Bound boundProduct(Bound a, Bound b) {
  if (a == Bound::EQ) return Bound::EQ;
  if (b == Bound::EQ) return a;
  return a == b ? Bound::LE : Bound::GE;
}

namespace {

class Avoider {
 public:
  Avoider(const Ctx& ctx, std::string x, int fuel) : ctx_(ctx), x_(std::move(x)), fuel_(fuel) {}

  AvoidResult go(const Type& ty, Bound want) {
    if (!ty.isRefined()) return {ty, Bound::EQ};  // Avoid-Top, Avoid-Bot
    Type base;
    Bound achieved = Bound::EQ;
    if (ty.base.isNamed()) {
      base = Type::named(ty.base.name);  // Avoid-Name
    } else if (!ty.base.path.isVar(x_)) {
      base = Type::refined(ty.base);  // Avoid-Path-NE
    } else {
      // Avoid-Path-Eq: unfold x.t through its declared bound, one fuel unit per step
      if (fuel_ <= 0)
        throw NomError(ErrorKind::FuelExhausted,
                       "avoidance of '" + x_ + "' ran out of fuel unfolding " + toString(ty.base));
      --fuel_;
      Type tx = typePath(ctx_, Path::mkVar(x_));
      auto d = tryLookupDecl(ctx_, expose(ctx_, tx), Path::mkVar(x_), ty.base.label);
      if (!d || d->kind != MemberDecl::Kind::TypeMember)
        throw NomError(ErrorKind::AvoidFailure, "cannot eliminate '" + x_ + "' from " + toString(ty.base) +
                                                    ": no such type member");
      if (d->bound != Bound::EQ && d->bound != want)
        throw NomError(ErrorKind::AvoidFailure, "cannot eliminate '" + x_ + "' from " + toString(ty.base) +
                                                    ": its bound is " + toString(d->bound) +
                                                    " but " + toString(want) + " is required");
      AvoidResult r = go(d->ty, want);
      achieved = boundJoinOrThrow(d->bound, r.achieved);
      base = r.ty;
    }
    // Avoid-Type: members are avoided under B_r · B. When the caller needs equality every
    // member must stay equal too, so EQ is demanded throughout.
    Refinement rr;
    bool allEq = achieved == Bound::EQ;
    for (const auto& m : ty.refinement.members) {
      Bound mw = want == Bound::EQ ? Bound::EQ : boundProduct(m.bound, want);
      AvoidResult rm = go(m.ty, mw);
      if (rm.achieved != Bound::EQ) allEq = false;
      rr.members.push_back(RefinementMember{m.label, m.bound, std::move(rm.ty)});
    }
    return {withRefinement(base, rr), allEq ? Bound::EQ : want};
  }

 private:
  const Ctx& ctx_;
  std::string x_;
  int fuel_;
};

}  // namespace

AvoidResult avoid(const Ctx& ctx, const Type& ty, const std::string& x, Bound want, int fuel) {
  return Avoider(ctx, x, fuel).go(ty, want);
}

AvoidResult avoid(const Ctx& ctx, const Type& ty, const std::string& x, Bound want) {
  return avoid(ctx, ty, x, want, ctx.avoidFuel);
}

std::size_t rank(const VarEnv& gamma, const std::string& x) {
  for (std::size_t i = gamma.size(); i > 0; --i)
    if (gamma[i - 1].first == x) return i;
  throw NomError(ErrorKind::UnboundPath, "unbound variable '" + x + "'");
}

std::size_t rank(const VarEnv& gamma, const Path& p) { return p.isVar() ? rank(gamma, p.var) : 0; }

std::size_t rank(const VarEnv& gamma, const Type& ty) {
  std::size_t r = 0;
  for (const auto& x : freeVars(ty)) r = std::max(r, rank(gamma, x));
  return r;
}

std::size_t headRank(const VarEnv& gamma, const Type& ty) {
  if (!ty.isPathSel()) return 0;
  return rank(gamma, ty.base.path);
}

bool envWellFormed(const VarEnv& gamma) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!seen.insert(gamma[i].first).second) return false;
    VarEnv prefix(gamma.begin(), gamma.begin() + static_cast<std::ptrdiff_t>(i));
    try {
      if (rank(prefix, gamma[i].second) > i) return false;
    } catch (const NomError&) {
      return false;
    }
  }
  return true;
}

}  // namespace nomwyv
