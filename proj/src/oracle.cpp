#include "nomwyv/oracle.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "nomwyv/graphs.hpp"
#include "nomwyv/subtype.hpp"
#include "nomwyv/typecheck.hpp"

namespace nomwyv {

std::string toString(const OracleVerdict& v) {
  switch (v.kind) {
    case OracleVerdict::Kind::Holds: return "Holds(" + std::to_string(v.depth) + ")";
    case OracleVerdict::Kind::Refuted: return "Refuted(" + std::to_string(v.depth) + ")";
    case OracleVerdict::Kind::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

// Look-Refine / Look-Name, restated here so the oracle shares no code with the engine.
std::optional<RefinementMember> lookupTypeMember(const Ctx& ctx, const Type& ty, const Path& p,
                                                 const std::string& t) {
  if (!ty.isRefined()) return std::nullopt;
  for (const auto& m : ty.refinement.members)
    if (m.label == t) return m;
  if (!ty.base.isNamed()) return std::nullopt;
  auto it = ctx.delta().find(ty.base.name);
  if (it == ctx.delta().end()) return std::nullopt;
  for (const auto& m : it->second.members)
    if (m.kind == MemberDecl::Kind::TypeMember && m.label == t)
      return RefinementMember{m.label, m.bound, substPath(m.ty, it->second.selfVar, p)};
  return std::nullopt;
}

std::optional<Type> pathType(const Ctx& ctx, const Path& p) {
  if (p.isVar()) {
    for (auto it = ctx.gamma().rbegin(); it != ctx.gamma().rend(); ++it)
      if (it->first == p.var) return it->second;
    return std::nullopt;
  }
  auto it = ctx.store().find(p.loc);
  if (it == ctx.store().end()) return std::nullopt;
  return it->second;
}

Type mergeInto(const Type& t, const Refinement& r) {
  if (!t.isRefined()) return t;
  Type out = t;
  for (const auto& m : r.members) {
    auto pos = std::find_if(out.refinement.members.begin(), out.refinement.members.end(),
                            [&](const RefinementMember& x) { return x.label == m.label; });
    if (pos != out.refinement.members.end()) out.refinement.members.erase(pos);
  }
  for (const auto& m : r.members) out.refinement.members.push_back(m);
  return out;
}

enum class Tri { Yes, No, Unknown };

Tri both(Tri a, Tri b) {
  if (a == Tri::No || b == Tri::No) return Tri::No;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::Yes;
}

struct Cast {
  std::optional<Type> ty;  // set when the non-trivial rule applies
  bool unknown = false;
};

// Uc-Upper (lower == false) or Dc-Lower (lower == true) through the judgment form of exposure.
Cast castJudgment(const Ctx& ctx, const Type& ty, bool lower) {
  Cast c;
  if (!ty.isPathSel()) return c;
  auto tp = pathType(ctx, ty.base.path);
  if (!tp) return c;
  auto ex = exposeJudgment(ctx, *tp);
  if (!ex) {
    c.unknown = true;
    return c;
  }
  auto m = lookupTypeMember(ctx, *ex, ty.base.path, ty.base.label);
  if (!m) return c;
  if (lower ? m->bound == Bound::LE : m->bound == Bound::GE) return c;
  c.ty = mergeInto(m->ty, ty.refinement);
  return c;
}

class Search {
 public:
  explicit Search(const Ctx& ctx) : ctx_(ctx) {}

  Tri sub(const Type& a, const Type& b, int d) {
    if (d <= 0) return Tri::Unknown;
    std::string key = std::to_string(d) + "|" + toString(a) + " <: " + toString(b);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    memo_[key] = Tri::Unknown;  // a cyclic premise is never a finite derivation
    Tri r = rules(a, b, d);
    memo_[key] = r;
    return r;
  }

 private:
  Tri rules(const Type& a, const Type& b, int d) {
    std::vector<Tri> alts;
    if (b.isTop()) return Tri::Yes;     // S-Top
    if (a.isBottom()) return Tri::Yes;  // S-Bot
    if (a.isRefined() && b.isRefined()) {
      if (a.base == b.base) alts.push_back(ref(a.refinement, b.refinement, d - 1));  // S-Refine
      if (a.base.isNamed() && b.base.isNamed())
        for (const auto& s : ctx_.sigma())
          if (s.lhsName == a.base.name)  // S-NameUp
            alts.push_back(both(ref(a.refinement, s.lhsRefinement, d - 1),
                                sub(Type::named(s.rhsName, a.refinement), b, d - 1)));
    }
    // S-Lower and S-Upper with the trivial casts only re-derive the same judgment, so they
    // add no derivations and are left out.
    if (a.isPathSel()) {
      Cast c = castJudgment(ctx_, a, false);
      if (c.unknown) alts.push_back(Tri::Unknown);
      if (c.ty && !(*c.ty == a)) alts.push_back(sub(*c.ty, b, d - 1));
    }
    if (b.isPathSel()) {
      Cast c = castJudgment(ctx_, b, true);
      if (c.unknown) alts.push_back(Tri::Unknown);
      if (c.ty && !(*c.ty == b)) alts.push_back(sub(a, *c.ty, d - 1));
    }
    bool unknown = false;
    for (Tri t : alts) {
      if (t == Tri::Yes) return Tri::Yes;
      if (t == Tri::Unknown) unknown = true;
    }
    return unknown ? Tri::Unknown : Tri::No;
  }

  Tri ref(const Refinement& a, const Refinement& b, int d) {
    Tri acc = Tri::Yes;
    for (const auto& mb : b.members) {  // S-R-Nil / S-R-Cons
      auto ma = std::find_if(a.members.begin(), a.members.end(),
                             [&](const RefinementMember& m) { return m.label == mb.label; });
      if (ma == a.members.end()) return Tri::No;
      acc = both(acc, mem(*ma, mb, d));
      if (acc == Tri::No) return acc;
    }
    return acc;
  }

  Tri mem(const RefinementMember& a, const RefinementMember& b, int d) {
    switch (b.bound) {
      case Bound::EQ:
        if (a.bound != Bound::EQ) return Tri::No;
        return both(sub(a.ty, b.ty, d), sub(b.ty, a.ty, d));
      case Bound::LE:
        if (a.bound == Bound::GE) return Tri::No;
        return sub(a.ty, b.ty, d);
      case Bound::GE:
        if (a.bound == Bound::LE) return Tri::No;
        return sub(b.ty, a.ty, d);
    }
    return Tri::No;
  }

  const Ctx& ctx_;
  std::unordered_map<std::string, Tri> memo_;
};

}  // namespace

std::optional<Type> exposeJudgment(const Ctx& ctx, const Type& ty, int budget) {
  if (!ty.isPathSel()) return ty;  // Exp-Top, Exp-Bot, Exp-Name
  if (budget <= 0) return std::nullopt;
  auto tp = pathType(ctx, ty.base.path);
  if (!tp) return ty;
  auto ex = exposeJudgment(ctx, *tp, budget - 1);
  if (!ex) return std::nullopt;
  auto m = lookupTypeMember(ctx, *ex, ty.base.path, ty.base.label);
  if (!m || m->bound == Bound::GE) return ty;  // Exp-Otherwise
  auto inner = exposeJudgment(ctx, m->ty, budget - 1);  // Exp-Upper
  if (!inner) return std::nullopt;
  return mergeInto(*inner, ty.refinement);
}

OracleVerdict enumerateSubtype(const Ctx& ctx, const Type& lhs, const Type& rhs, int maxDepth) {
  Search s(ctx);
  for (int d = 1; d <= maxDepth; ++d) {
    Tri t = s.sub(lhs, rhs, d);
    if (t == Tri::Yes) return OracleVerdict::holds(d);
    if (t == Tri::No) return OracleVerdict::refuted(d);
  }
  return OracleVerdict::unknown();
}

// ---- generators ----

namespace {

struct NameSkel {
  std::string name;
  bool shape = false;
  int parent = -1;
  std::vector<MemberDecl> members;  // type members first; types filled in phase two
  std::size_t inherited = 0;        // leading members copied from the parent
};

class Gen {
 public:
  Gen(std::mt19937_64& rng, const GenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  int below(int n) { return n <= 0 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  Bound bound() {
    static const Bound bs[] = {Bound::LE, Bound::GE, Bound::EQ};
    return bs[below(3)];
  }

  // Where a type is being generated.
  struct Scope {
    std::string selfVar;                   // empty outside a declaration
    std::vector<std::string> earlier;      // self labels reachable without a guard
    std::vector<std::string> all;          // self labels reachable under a shape guard
    std::vector<std::pair<std::string, int>> vars;  // variable, index of its named type
  };

  Type type(const Scope& s, int depth, bool allowShape, bool guarded) {
    int pick = below(10);
    if (pick == 0) return Type::top();
    if (pick == 1) return Type::bottom();
    if (pick <= 3) {
      const auto& labels = guarded ? s.all : s.earlier;
      if (!s.selfVar.empty() && !labels.empty())
        return Type::pathSel(Path::mkVar(s.selfVar), labels[static_cast<std::size_t>(below(static_cast<int>(labels.size())))]);
      if (!s.vars.empty()) {
        const auto& [x, n] = s.vars[static_cast<std::size_t>(below(static_cast<int>(s.vars.size())))];
        auto tl = typeLabels(n);
        if (!tl.empty()) return Type::pathSel(Path::mkVar(x), tl[static_cast<std::size_t>(below(static_cast<int>(tl.size())))]);
      }
    }
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(names.size()); ++i)
      if (allowShape || !names[static_cast<std::size_t>(i)].shape) candidates.push_back(i);
    if (candidates.empty()) return Type::top();
    int n = candidates[static_cast<std::size_t>(below(static_cast<int>(candidates.size())))];
    return named(n, s, depth, allowShape, guarded, false);
  }

  // n with a random refinement over its type members.
  Type named(int n, const Scope& s, int depth, bool allowShape, bool guarded, bool nested) {
    const NameSkel& sk = names[static_cast<std::size_t>(n)];
    Refinement r;
    // shapes may be refined only at the outermost level of a type
    if (depth > 0 && !(sk.shape && nested) && coin(0.5)) {
      auto tl = typeLabels(n);
      std::shuffle(tl.begin(), tl.end(), rng_);
      tl.resize(static_cast<std::size_t>(below(static_cast<int>(std::min<std::size_t>(tl.size(), 2)) + 1)));
      for (const auto& l : tl) {
        Bound b = bound();
        bool innerShape = allowShape && b == Bound::LE;
        Type inner = type(s, depth - 1, innerShape, guarded || sk.shape);
        if (inner.isRefined() && inner.base.isNamed() && names[index(inner.base.name)].shape)
          inner.refinement = {};
        r.members.push_back(RefinementMember{l, b, inner});
      }
    }
    return Type::named(sk.name, r);
  }

  std::vector<std::string> typeLabels(int n) const {
    std::vector<std::string> out;
    for (const auto& m : names[static_cast<std::size_t>(n)].members)
      if (m.kind == MemberDecl::Kind::TypeMember) out.push_back(m.label);
    return out;
  }

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i].name == name) return i;
    return 0;
  }

  std::vector<NameSkel> names;

 private:
  std::mt19937_64& rng_;
  const GenConfig& cfg_;
};

}  // namespace

Program genProgram(const GenConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  Gen g(rng, cfg);
  int k = 1 + g.below(std::max(1, cfg.maxNames));
  // phase one: names, parents, member labels and bounds
  for (int i = 0; i < k; ++i) {
    NameSkel sk;
    sk.name = "N" + std::to_string(i);
    sk.shape = i > 0 && g.coin(cfg.shapeProbability);
    if (i > 0 && g.coin(0.5)) {
      int j = g.below(i);
      if (!sk.shape || g.names[static_cast<std::size_t>(j)].shape) sk.parent = j;
    }
    g.names.push_back(sk);
  }
  for (int i = 0; i < k; ++i) {
    NameSkel& sk = g.names[static_cast<std::size_t>(i)];
    int typeCount = 0;
    if (sk.parent >= 0) {
      sk.members = g.names[static_cast<std::size_t>(sk.parent)].members;  // replaced in phase two
      sk.inherited = sk.members.size();
    }
    int own = g.below(cfg.maxMembersPerName + 1);
    for (const auto& m : sk.members)
      if (m.kind == MemberDecl::Kind::TypeMember) ++typeCount;
    for (int j = 0; j < own; ++j) {
      MemberDecl m = MemberDecl::typeMember("t" + std::to_string(typeCount++), g.bound(), Type::top());
      sk.members.push_back(m);
    }
  }
  // phase two: member types, in index order so inherited members copy finished parents
  for (int i = 0; i < k; ++i) {
    NameSkel& sk = g.names[static_cast<std::size_t>(i)];
    if (sk.parent >= 0) {
      // the parent is finished by now, fields and methods included
      std::vector<MemberDecl> ms = g.names[static_cast<std::size_t>(sk.parent)].members;
      ms.insert(ms.end(), sk.members.begin() + static_cast<std::ptrdiff_t>(sk.inherited), sk.members.end());
      sk.inherited = g.names[static_cast<std::size_t>(sk.parent)].members.size();
      sk.members = std::move(ms);
    }
    Gen::Scope s;
    s.selfVar = "z";
    for (const auto& m : sk.members)
      if (m.kind == MemberDecl::Kind::TypeMember) s.all.push_back(m.label);
    for (std::size_t j = 0; j < sk.members.size(); ++j) {
      MemberDecl& m = sk.members[j];
      if (j >= sk.inherited && m.kind == MemberDecl::Kind::TypeMember) {
        bool allowShape = m.bound == Bound::LE;
        m.ty = g.type(s, cfg.maxRefinementDepth, allowShape, false);
        // the member's own top-level shape may carry a refinement
        if (m.ty.isRefined() && m.ty.base.isNamed() && g.names[g.index(m.ty.base.name)].shape && !allowShape)
          m.ty = Type::top();
      }
      if (m.kind == MemberDecl::Kind::TypeMember) s.earlier.push_back(m.label);
    }
    if (g.coin(0.3)) {
      Gen::Scope fs;
      sk.members.push_back(MemberDecl::field("v" + std::to_string(i), g.type(fs, 1, true, false)));
    }
    if (g.coin(0.3)) {
      int pn = g.below(static_cast<int>(g.names.size()));
      Gen::Scope ms;
      sk.members.push_back(MemberDecl::method("m" + std::to_string(i), "a", Type::named(g.names[static_cast<std::size_t>(pn)].name),
                                              g.type(ms, 1, true, false)));
    }
  }

  Program p;
  for (const auto& sk : g.names) {
    TopDecl d;
    d.kind = TopDecl::Kind::Named;
    d.mark = sk.shape ? ShapeMark::Shape : ShapeMark::Material;
    d.name = sk.name;
    d.selfVar = "z";
    d.members = sk.members;
    p.decls.push_back(d);
  }
  for (int i = 0; i < k; ++i) {
    const NameSkel& sk = g.names[static_cast<std::size_t>(i)];
    if (sk.parent < 0) continue;
    TopDecl d;
    d.kind = TopDecl::Kind::Subtype;
    d.lhsName = sk.name;
    d.rhsName = g.names[static_cast<std::size_t>(sk.parent)].name;
    // an optional strengthening refinement; its roots have higher index than the parent
    const auto& pm = g.names[static_cast<std::size_t>(sk.parent)].members;
    for (const auto& m : pm) {
      if (m.kind != MemberDecl::Kind::TypeMember || !g.coin(0.3)) continue;
      if (m.bound == Bound::LE) {
        Type t = Type::bottom();
        bool shapeRoot = false;
        if (m.ty.isTop() && g.coin(0.5)) {
          int r = sk.parent + 1 + g.below(k - sk.parent - 1);
          t = Type::named(g.names[static_cast<std::size_t>(r)].name);
          shapeRoot = g.names[static_cast<std::size_t>(r)].shape;
        }
        // an EQ bound is also a lower bound, so shapes only appear under LE
        Bound b = shapeRoot || g.coin(0.5) ? Bound::LE : Bound::EQ;
        d.lhsRefinement.members.push_back(RefinementMember{m.label, b, t});
      } else if (m.bound == Bound::GE) {
        d.lhsRefinement.members.push_back(RefinementMember{m.label, Bound::GE, Type::top()});
      }
    }
    p.decls.push_back(d);
  }
  p.main = mkNew(Type::top(), "z", {});
  return p;
}

Type genType(const Program& p, const VarEnv& gamma, std::mt19937_64& rng, int depth, bool allowShape) {
  GenConfig cfg;
  Gen g(rng, cfg);
  for (const auto& d : p.decls) {
    if (d.kind != TopDecl::Kind::Named) continue;
    NameSkel sk;
    sk.name = d.name;
    sk.shape = d.mark == ShapeMark::Shape;
    sk.members = d.members;
    g.names.push_back(sk);
  }
  if (g.names.empty()) return g.coin(0.5) ? Type::top() : Type::bottom();
  Gen::Scope s;
  for (const auto& [x, t] : gamma)
    if (t.isNamed()) s.vars.emplace_back(x, static_cast<int>(g.index(t.base.name)));
  return g.type(s, depth, allowShape, false);
}

namespace {

// One random weakening step: the result is usually a supertype of ty.
Type relax(const Ctx& ctx, const Type& ty, std::mt19937_64& rng, int depth) {
  auto below = [&](int n) { return n <= 0 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  if (!ty.isRefined()) return ty;
  int pick = below(8);
  if (pick == 0) return Type::top();
  if (pick <= 2 && ty.isPathSel())
    if (auto up = tryUpcast(ctx, ty)) return *up;
  if (pick <= 3 && ty.isNamed()) {
    std::vector<const SubtypeEntry*> ups;
    for (const auto& s : ctx.sigma())
      if (s.lhsName == ty.base.name) ups.push_back(&s);
    if (!ups.empty()) return Type::named(ups[static_cast<std::size_t>(below(static_cast<int>(ups.size())))]->rhsName, ty.refinement);
  }
  if (ty.refinement.members.empty()) {
    // refine towards a member's declared bound, which the expansion recovers
    if (ty.isNamed() && ctx.def(ty.base.name) && pick >= 6) {
      for (const auto& m : ctx.def(ty.base.name)->members)
        if (m.kind == MemberDecl::Kind::TypeMember && freeVars(m.ty).empty()) {
          Type out = ty;
          out.refinement.members.push_back(RefinementMember{m.label, m.bound, m.ty});
          return out;
        }
    }
    return ty;
  }
  Type out = ty;
  auto& ms = out.refinement.members;
  std::size_t i = static_cast<std::size_t>(below(static_cast<int>(ms.size())));
  if (pick <= 5) {
    ms.erase(ms.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }
  RefinementMember& m = ms[i];
  if (m.bound == Bound::EQ) {
    m.bound = below(2) ? Bound::LE : Bound::GE;
    return out;
  }
  if (m.bound == Bound::LE && depth > 0) m.ty = relax(ctx, m.ty, rng, depth - 1);
  return out;
}

}  // namespace

GenQuery genQuery(const Program& p, std::mt19937_64& rng, const GenConfig& cfg) {
  GenQuery q;
  auto below = [&](int n) { return n <= 0 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  std::vector<std::string> names;
  for (const auto& d : p.decls)
    if (d.kind == TopDecl::Kind::Named) names.push_back(d.name);
  Contexts c = buildContexts(p);
  Ctx ctx(c.delta, c.sigma);
  int vars = 1 + below(3);
  for (int i = 0; i < vars && !names.empty(); ++i) {
    Type t = genType(p, q.gamma, rng, 1, true);
    if (!t.isNamed()) t = Type::named(names[static_cast<std::size_t>(below(static_cast<int>(names.size())))]);
    q.gamma.emplace_back("x" + std::to_string(i), t);
    ctx = ctx.push("x" + std::to_string(i), t);
  }
  int depth = cfg.maxRefinementDepth;
  q.lhs = genType(p, q.gamma, rng, depth, true);
  // favour path-dependent left sides
  if (below(3) == 0)
    for (int tries = 0; tries < 4 && !q.lhs.isPathSel(); ++tries) q.lhs = genType(p, q.gamma, rng, depth, true);
  if (below(5) == 0) {
    q.rhs = genType(p, q.gamma, rng, depth, true);
    return q;
  }
  q.rhs = q.lhs;
  int steps = 1 + below(3);
  for (int i = 0; i < steps; ++i) q.rhs = relax(ctx, q.rhs, rng, depth);
  if (below(3) == 0) std::swap(q.lhs, q.rhs);
  return q;
}

std::string FuzzStats::report() const {
  std::ostringstream os;
  os << "cases: " << cases << "\n"
     << "oracle holds: " << holds << "  refuted: " << refuted << "  unknown: " << unknown << " ("
     << (cases ? 100.0 * static_cast<double>(unknown) / static_cast<double>(cases) : 0.0) << "%)\n"
     << "agreement: " << agree << "/" << (agree + disagree) << " resolved\n"
     << "engine true: " << engineTrue << "\n"
     << "max engine steps: " << maxSteps << "  ceiling hits: " << ceilingHits << "\n"
     << "generated programs failing separation: " << separationFailures << "\n"
     << "generated programs rejected by the checker: " << pipelineErrors << "\n";
  for (const auto& d : disagreements) os << "disagreement: " << d << "\n";
  return os.str();
}

FuzzStats runFuzz(std::uint64_t seed, std::uint64_t cases, int depth) {
  FuzzStats st;
  for (std::uint64_t i = 0; i < cases; ++i) {
    GenConfig cfg;
    cfg.seed = seed * 1000003ULL + i;
    cfg.maxNames = 6;
    cfg.maxMembersPerName = 4;
    cfg.maxRefinementDepth = 3;
    cfg.shapeProbability = 0.3;
    Program p = genProgram(cfg);
    Contexts c = buildContexts(p);
    auto sep = checkSyntacticSeparation(p, *c.delta, *c.sigma);
    auto valid = checkShapeValidity(buildSdg(*c.delta, *c.sigma), *c.delta);
    if (!sep.ok() || !valid.ok()) ++st.separationFailures;
    if (!checkProgram(p).ok()) ++st.pipelineErrors;
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    GenQuery q = genQuery(p, rng, cfg);
    Ctx ctx = makeCtx(c);
    for (const auto& [x, t] : q.gamma) ctx = ctx.push(x, t);
    SubtypeResult r = isSubtype(ctx, q.lhs, q.rhs);
    OracleVerdict v = enumerateSubtype(ctx, q.lhs, q.rhs, depth);
    ++st.cases;
    st.maxSteps = std::max(st.maxSteps, r.trace.steps);
    if (r.trace.ceilingHit) ++st.ceilingHits;
    if (r.holds) ++st.engineTrue;
    switch (v.kind) {
      case OracleVerdict::Kind::Holds: ++st.holds; break;
      case OracleVerdict::Kind::Refuted: ++st.refuted; break;
      case OracleVerdict::Kind::Unknown: ++st.unknown; break;
    }
    if (!v.resolved()) continue;
    if ((v.kind == OracleVerdict::Kind::Holds) == r.holds) {
      ++st.agree;
    } else {
      ++st.disagree;
      std::string g;
      for (const auto& [x, t] : q.gamma) g += x + ": " + toString(t) + ", ";
      st.disagreements.push_back("seed " + std::to_string(cfg.seed) + ": [" + g + "] " + toString(q.lhs) + " <: " +
                                 toString(q.rhs) + " engine=" + (r.holds ? "true" : "false") + " oracle=" + toString(v));
    }
  }
  return st;
}

}  // namespace nomwyv
