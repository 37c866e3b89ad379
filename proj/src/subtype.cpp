#include "nomwyv/subtype.hpp"

#include <algorithm>
#include <unordered_set>

namespace nomwyv {

namespace {

void renderNode(const TraceNode& n, int depth, std::string& out) {
  out += std::string(static_cast<size_t>(depth) * 2, ' ') + n.rule + ": " + n.judgment;
  if (!n.ok) out += "  [fail]";
  out += "\n";
  for (const auto& c : n.children) renderNode(c, depth + 1, out);
}

struct CeilingHit {};

class Engine {
 public:
  Engine(const SubtypeOptions& opts, DerivationTrace& trace) : opts_(opts), trace_(trace) {
    if (opts_.trace) stack_.push_back(TraceNode{"root", "", true, {}});
  }

  void finish() {
    if (!opts_.trace || stack_.empty()) return;
    TraceNode root = std::move(stack_.front());
    if (root.children.size() == 1)
      trace_.tree = std::move(root.children.front());
    else
      trace_.tree = std::move(root);
  }

  bool sub(const Ctx& ctx, const Type& a, const Type& b) {
    bool useMemo = opts_.memo && !opts_.trace;
    std::string key;
    if (useMemo) {
      key = ctxKey(ctx) + toString(a) + " <: " + toString(b);
      if (failed_.count(key)) return false;
    }
    bool r = subRules(ctx, a, b);
    if (!r && useMemo) failed_.insert(key);
    return r;
  }

  bool ref(const Ctx& ctx, const Refinement& a, const Refinement& b) {
    // S-R-Nil / S-R-Cons
    for (const auto& mb : b.members) {
      const RefinementMember* ma = a.find(mb.label);
      if (!ma) {
        Attempt at(*this, "S-R-Cons", [&] { return toString(a) + " <: " + toString(b) + " (no " + mb.label + ")"; });
        return false;
      }
      if (!mem(ctx, *ma, mb)) return false;
    }
    return true;
  }

  bool mem(const Ctx& ctx, const RefinementMember& a, const RefinementMember& b) {
    auto j = [&] {
      return a.label + " " + toString(a.bound) + " " + toString(a.ty) + " <: " + b.label + " " +
             toString(b.bound) + " " + toString(b.ty);
    };
    switch (b.bound) {
      case Bound::EQ: {
        Attempt at(*this, "S-T-Eq", j);
        if (a.bound != Bound::EQ) return false;
        return at.done(sub(ctx, a.ty, b.ty) && sub(ctx, b.ty, a.ty));
      }
      case Bound::LE: {
        Attempt at(*this, "S-T-Le", j);
        if (a.bound == Bound::GE) return false;
        return at.done(sub(ctx, a.ty, b.ty));
      }
      case Bound::GE: {
        Attempt at(*this, "S-T-Ge", j);
        if (a.bound == Bound::LE) return false;
        return at.done(sub(ctx, b.ty, a.ty));
      }
    }
    return false;
  }

  bool decls(const Ctx& ctx, const std::vector<MemberDecl>& as, const std::vector<MemberDecl>& bs,
             std::string* failing) {
    if (bs.empty()) {
      Attempt at(*this, "S-Top-Nil", [] { return std::string("_ <: {}"); });
      return at.done(true);
    }
    for (const auto& b : bs) {
      const MemberDecl* a = nullptr;
      for (const auto& cand : as)
        if (cand.label == b.label && cand.kind == b.kind) a = &cand;
      if (!a || !declPair(ctx, *a, b)) {
        if (failing) *failing = b.label;
        return false;
      }
    }
    return true;
  }

 private:
  // RAII record of one rule application.
  class Attempt {
   public:
    template <class F>
    Attempt(Engine& e, const char* rule, F judgment) : e_(e) {
      if (++e_.trace_.steps > e_.opts_.stepCeiling) throw CeilingHit{};
      if (e_.opts_.trace) e_.stack_.push_back(TraceNode{rule, judgment(), false, {}});
    }
    bool done(bool ok) {
      if (e_.opts_.trace) e_.stack_.back().ok = ok;
      return ok;
    }
    ~Attempt() {
      if (!e_.opts_.trace) return;
      TraceNode n = std::move(e_.stack_.back());
      e_.stack_.pop_back();
      e_.stack_.back().children.push_back(std::move(n));
    }

   private:
    Engine& e_;
  };

  static std::string ctxKey(const Ctx& ctx) {
    const auto& g = ctx.gamma();
    std::string k = std::to_string(g.size());
    for (const auto& [x, t] : g) k += "," + x + ":" + toString(t);
    return k + "|";
  }

  bool subRules(const Ctx& ctx, const Type& a, const Type& b) {
    auto j = [&] { return toString(a) + " <: " + toString(b); };
    if (b.isTop()) {
      Attempt at(*this, "S-Top", j);
      return at.done(true);
    }
    if (a.isBottom()) {
      Attempt at(*this, "S-Bot", j);
      return at.done(true);
    }
    if (a.isRefined() && b.isRefined()) {
      if (a.base == b.base) {
        Attempt at(*this, "S-Refine", j);
        if (at.done(ref(ctx, a.refinement, b.refinement))) return true;
      }
      if (a.base.isNamed() && b.base.isNamed()) {
        for (const auto& s : ctx.sigma()) {
          if (s.lhsName != a.base.name) continue;
          Attempt at(*this, "S-NameUp", [&] { return j() + " via " + s.lhsName + " <: " + s.rhsName; });
          if (at.done(ref(ctx, a.refinement, s.lhsRefinement) &&
                      sub(ctx, Type::named(s.rhsName, a.refinement), b)))
            return true;
        }
      }
    }
    if (a.isPathSel()) {
      if (auto up = tryUpcast(ctx, a)) {
        Attempt at(*this, "S-Lower", j);
        if (at.done(sub(ctx, *up, b))) return true;
      }
    }
    if (b.isPathSel()) {
      if (auto down = tryDowncast(ctx, b)) {
        Attempt at(*this, "S-Upper", j);
        if (at.done(sub(ctx, a, *down))) return true;
      }
    }
    return false;
  }

  bool declPair(const Ctx& ctx, const MemberDecl& a, const MemberDecl& b) {
    switch (b.kind) {
      case MemberDecl::Kind::TypeMember:
        return mem(ctx, RefinementMember{a.label, a.bound, a.ty}, RefinementMember{b.label, b.bound, b.ty});
      case MemberDecl::Kind::Field: {
        Attempt at(*this, "S-Top-Field", [&] { return toString(a) + " <: " + toString(b); });
        return at.done(sub(ctx, a.ty, b.ty));
      }
      case MemberDecl::Kind::Method: {
        Attempt at(*this, "S-Top-Method", [&] { return toString(a) + " <: " + toString(b); });
        if (a.params.size() != 1 || b.params.size() != 1) return false;
        const Param& pa = a.params[0];
        const Param& pb = b.params[0];
        // rename both parameters to a common variable that is fresh for Γ
        std::set<std::string> avoid = ctx.varNames();
        for (const auto& v : freeVars(a.resultTy))
          if (v != pa.name) avoid.insert(v);
        for (const auto& v : freeVars(b.resultTy))
          if (v != pb.name) avoid.insert(v);
        std::string z = freshName(pb.name, avoid);
        if (!sub(ctx, pb.ty, pa.ty)) return at.done(false);
        Ctx inner = ctx.push(z, pb.ty);
        Type ra = substPath(a.resultTy, pa.name, Path::mkVar(z));
        Type rb = substPath(b.resultTy, pb.name, Path::mkVar(z));
        return at.done(sub(inner, ra, rb));
      }
    }
    return false;
  }

  const SubtypeOptions& opts_;
  DerivationTrace& trace_;
  std::vector<TraceNode> stack_;
  std::unordered_set<std::string> failed_;
};

template <class F>
SubtypeResult runEngine(const SubtypeOptions& opts, F body) {
  SubtypeResult res;
  Engine e(opts, res.trace);
  try {
    res.holds = body(e);
  } catch (const CeilingHit&) {
    res.holds = false;
    res.trace.ceilingHit = true;
  }
  if (!res.trace.ceilingHit) e.finish();
  return res;
}

}  // namespace

std::string DerivationTrace::render() const {
  std::string out;
  if (tree) renderNode(*tree, 0, out);
  if (ceilingHit) out += "(step ceiling reached)\n";
  return out;
}

SubtypeResult isSubtype(const Ctx& ctx, const Type& lhs, const Type& rhs, const SubtypeOptions& opts) {
  return runEngine(opts, [&](Engine& e) { return e.sub(ctx, lhs, rhs); });
}

bool memberSubtype(const Ctx& ctx, const RefinementMember& lhs, const RefinementMember& rhs,
                   const SubtypeOptions& opts) {
  return runEngine(opts, [&](Engine& e) { return e.mem(ctx, lhs, rhs); }).holds;
}

bool refinementSubtype(const Ctx& ctx, const Refinement& lhs, const Refinement& rhs, const SubtypeOptions& opts) {
  return runEngine(opts, [&](Engine& e) { return e.ref(ctx, lhs, rhs); }).holds;
}

SubtypeResult declListSubtype(const Ctx& ctx, const std::vector<MemberDecl>& lhs, const std::vector<MemberDecl>& rhs,
                              const SubtypeOptions& opts, std::string* failing) {
  return runEngine(opts, [&](Engine& e) { return e.decls(ctx, lhs, rhs, failing); });
}

// ---- expansion ----

int depth(const Type& ty) {
  if (!ty.isRefined()) return 0;
  int d = 0;
  for (const auto& m : ty.refinement.members) d = std::max(d, 1 + depth(m.ty));
  return d;
}

Type expand1(const Ctx& ctx, const BaseType& b, int) {
  if (!b.isNamed()) return Type::refined(b);
  const NameDef* def = ctx.def(b.name);
  if (!def) return Type::named(b.name);
  std::string z = freshName("z", ctx.varNames());
  Ctx inner = ctx.push(z, Type::named(b.name));
  Refinement r;
  for (const auto& m : def->members) {
    if (m.kind != MemberDecl::Kind::TypeMember) continue;
    MemberDecl md = substPath(m, def->selfVar, Path::mkVar(z));
    try {
      AvoidResult ar = avoid(inner, md.ty, z, Bound::EQ);
      r.members.push_back(RefinementMember{md.label, md.bound, ar.ty});
    } catch (const NomError&) {
      // self-referential member: left unexpanded
    }
  }
  return Type::named(b.name, r);
}

Type expand(const Ctx& ctx, const Type& ty, int d) {
  if (d <= 0 || !ty.isRefined()) return ty;
  Refinement r;
  for (const auto& m : ty.refinement.members) r.members.push_back(RefinementMember{m.label, m.bound, expand(ctx, m.ty, d - 1)});
  return withRefinement(expand1(ctx, ty.base, d), r);
}

SubtypeResult check(const Ctx& ctx, const Type& lhs, const Type& rhs, const SubtypeOptions& opts) {
  int d = std::max(depth(lhs), depth(rhs));
  return isSubtype(ctx, expand(ctx, lhs, d), expand(ctx, rhs, d), opts);
}

// ---- energy ----

std::uint64_t pathEnergy(const Ctx& ctx, const MeasureTable& mt, const BaseType& b) {
  if (b.isNamed()) {
    auto it = mt.e.find(SdgNode::nameNode(b.name));
    if (it == mt.e.end()) throw NomError(ErrorKind::DivergentMeasure, "no energy recorded for '" + b.name + "'");
    return it->second;
  }
  Type ex = expose(ctx, typePath(ctx, b.path));
  if (!ex.isNamed())
    throw NomError(ErrorKind::DivergentMeasure, "cannot measure " + toString(b) + ": its path does not expose to a name");
  SdgNode key = SdgNode::pseudo(ex.base.name, b.label);
  auto m = mt.m.find(key);
  auto a = mt.a.find(key);
  if (m == mt.m.end() || a == mt.a.end())
    throw NomError(ErrorKind::DivergentMeasure, "no measure recorded for " + toString(key));
  return typeEnergy(ctx, mt, ex) * m->second + a->second;
}

std::uint64_t typeEnergy(const Ctx& ctx, const MeasureTable& mt, const Type& ty) {
  if (!ty.isRefined()) return 0;
  std::uint64_t e = pathEnergy(ctx, mt, ty.base);
  for (const auto& m : ty.refinement.members) e += typeEnergy(ctx, mt, m.ty);
  return e;
}

}  // namespace nomwyv
