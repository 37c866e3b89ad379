#include "nomwyv/typecheck.hpp"

#include <set>

namespace nomwyv {

std::string errorCode(ErrorKind k) {
  switch (k) {
    case ErrorKind::UnboundPath: return "E0301";
    case ErrorKind::NoSuchMember: return "E0302";
    case ErrorKind::LookupOnPathBase: return "E0302";
    case ErrorKind::SubtypeFailure: return "E0303";
    case ErrorKind::InvalidType: return "E0304";
    case ErrorKind::BadSubtypeDecl: return "E0305";
    case ErrorKind::AvoidFailure: return "E0306";
    case ErrorKind::FuelExhausted: return "E0306";
    case ErrorKind::IncompatibleBounds: return "E0306";
    case ErrorKind::DuplicateName: return "E0307";
    default: return "E0399";
  }
}

Diagnostic toDiagnostic(const TypeError& e, const std::string& file, bool withTrace) {
  std::string msg = toString(e.kind) + ": " + e.message;
  if (e.expected && e.actual)
    msg += "\n  expected: " + toString(*e.expected) + "\n  found:    " + toString(*e.actual);
  if (withTrace && e.trace && e.trace->tree) msg += "\n  derivation attempt:\n" + e.trace->render();
  while (!msg.empty() && msg.back() == '\n') msg.pop_back();
  return Diagnostic{file, e.span, Severity::Error, errorCode(e.kind), msg};
}

namespace {

[[noreturn]] void fail(ErrorKind k, SourceSpan sp, const std::string& msg) {
  TypeError e;
  e.kind = k;
  e.span = sp;
  e.message = msg;
  throw TypeCheckError(std::move(e));
}

// Runs f, converting engine errors into located type errors.
template <class F>
auto located(SourceSpan sp, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const NomError& ne) {
    ErrorKind k = ne.kind();
    if (k == ErrorKind::FuelExhausted || k == ErrorKind::IncompatibleBounds) k = ErrorKind::AvoidFailure;
    fail(k, sp, ne.what());
  }
}

class Checker {
 public:
  explicit Checker(const CheckOptions& opts) : opts_(opts) {}

  // subtype obligation via the expansion wrapper
  void require(const Ctx& ctx, const Type& actual, const Type& expected, SourceSpan sp, const std::string& what) {
    SubtypeOptions so;
    so.trace = opts_.trace;
    SubtypeResult r = located(sp, [&] { return check(ctx, actual, expected, so); });
    if (r.holds) return;
    TypeError e;
    e.kind = ErrorKind::SubtypeFailure;
    e.span = sp;
    e.message = what + ": " + toString(actual) + " is not a subtype of " + toString(expected);
    if (r.trace.ceilingHit) e.message += " (derivation step ceiling reached)";
    e.expected = expected;
    e.actual = actual;
    e.trace = std::move(r.trace);
    throw TypeCheckError(std::move(e));
  }

  bool holds(const Ctx& ctx, const Type& a, const Type& b) { return check(ctx, a, b).holds; }

  // member comparison with expansion at the leaves
  bool memberOk(const Ctx& ctx, Bound pb, const Type& pt, Bound rb, const Type& rt) {
    switch (rb) {
      case Bound::EQ: return pb == Bound::EQ && holds(ctx, pt, rt) && holds(ctx, rt, pt);
      case Bound::LE: return pb != Bound::GE && holds(ctx, pt, rt);
      case Bound::GE: return pb != Bound::LE && holds(ctx, rt, pt);
    }
    return false;
  }

  void typeValid(const Ctx& ctx, const Type& ty, SourceSpan sp) {
    if (!ty.isRefined()) return;
    if (ty.base.isNamed() && !ctx.def(ty.base.name))
      fail(ErrorKind::InvalidType, sp, "unknown type name '" + ty.base.name + "'");
    if (!ty.base.isNamed()) located(sp, [&] { return typePath(ctx, ty.base.path); });
    for (const auto& m : ty.refinement.members) typeValid(ctx, m.ty, sp);
    if (ty.refinement.empty()) return;
    // expose the unrefined base; each refinement member must fit the member it refines,
    // checked with a self binding of the refined type in scope
    Type ex = located(sp, [&] { return expose(ctx, Type::refined(ty.base)); });
    if (!ex.isNamed())
      fail(ErrorKind::InvalidType, sp, "type " + toString(ty) + " refines members of " + toString(ex) +
                                           ", which declares none");
    std::string x = freshName("self", varsOf(ctx, ty));
    Ctx inner = located(sp, [&] { return ctx.push(x, ty); });
    std::vector<MemberDecl> members = membersOf(ctx, ex, x);
    for (const auto& m : ty.refinement.members) {
      const MemberDecl* d = findMember(members, m.label, MemberDecl::Kind::TypeMember);
      if (!d) fail(ErrorKind::InvalidType, sp, "type " + toString(ty) + " refines '" + m.label +
                                                   "', which " + toString(ex) + " does not declare as a type member");
      bool ok = located(sp, [&] { return memberOk(inner, m.bound, m.ty, d->bound, d->ty); });
      if (!ok)
        fail(ErrorKind::InvalidType, sp, "invalid type " + toString(ty) + ": refinement '" + m.label + " " +
                                             toString(m.bound) + " " + toString(m.ty) +
                                             "' does not satisfy the declaration '" + toString(*d) + "'");
    }
  }

  Type typeExpr(const Ctx& ctx, const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::PathE:
        return located(e->span, [&] { return typePath(ctx, e->path); });

      case Expr::Kind::FieldSel: {
        // selection: expose the receiver to a named type, take the field's declared type
        // with the receiver substituted for self
        const Path& p = pathOf(e->target);
        MemberDecl d = memberAt(ctx, p, e->label, MemberDecl::Kind::Field, e->span);
        return d.ty;
      }

      case Expr::Kind::MethodApp: {
        // application: the argument must check against the parameter type; the result
        // type has the argument path substituted for the parameter
        const Path& p = pathOf(e->target);
        MemberDecl d = memberAt(ctx, p, e->label, MemberDecl::Kind::Method, e->span);
        if (e->args.size() != 1 || d.params.size() != 1)
          fail(ErrorKind::Internal, e->span, "method '" + e->label + "' must take exactly one argument");
        const Path& a = pathOf(e->args[0]);
        Type at = located(e->span, [&] { return typePath(ctx, a); });
        require(ctx, at, d.params[0].ty, e->args[0]->span,
                "argument of '" + e->label + "' has the wrong type");
        return substPath(d.resultTy, d.params[0].name, a);
      }

      case Expr::Kind::New:
        // allocation: the ascribed type must be valid and the definitions must satisfy it
        typeValid(ctx, e->ty, e->span);
        typeObjDefn(ctx, e->var, e->defs, e->ty, e->span);
        return e->ty;

      case Expr::Kind::Let: {
        // let: type the bound, bind it (at the ascription when present), type the body,
        // then over-approximate the body type so the binder is no longer mentioned
        Type bt = typeExpr(ctx, e->bound);
        Type bindTy = bt;
        if (e->ascription) {
          typeValid(ctx, *e->ascription, e->span);
          require(ctx, bt, *e->ascription, e->span, "let binding '" + e->var + "' does not match its ascription");
          bindTy = *e->ascription;
        }
        std::string x = e->var;
        ExprPtr body = e->body;
        if (ctx.hasVar(x)) {
          std::set<std::string> avoidSet = ctx.varNames();
          collectFreeVars(body, avoidSet);
          x = freshName(x, avoidSet);
          body = substPath(body, e->var, Path::mkVar(x));
        }
        Ctx inner = located(e->span, [&] { return ctx.push(x, bindTy); });
        Type t2 = typeExpr(inner, body);
        AvoidResult r = located(e->span, [&] { return avoid(inner, t2, x, Bound::LE); });
        return r.ty;
      }
    }
    fail(ErrorKind::Internal, e->span, "unknown expression form");
  }

  void typeObjDefn(const Ctx& ctx, const std::string& selfVar, const std::vector<ObjMemberDefn>& defsIn,
                   const Type& ascribed, SourceSpan sp) {
    std::string z = selfVar;
    std::vector<ObjMemberDefn> defs = defsIn;
    if (ctx.hasVar(z)) {
      std::set<std::string> avoidSet = ctx.varNames();
      for (const auto& d : defs) collectFreeVars(d, avoidSet);
      z = freshName(z, avoidSet);
      for (auto& d : defs) d = substPath(d, selfVar, Path::mkVar(z));
    }
    // τ_x: the ascribed type with the type-member definitions merged in as exact bindings
    Refinement typeDefs;
    for (const auto& d : defs)
      if (d.kind == ObjMemberDefn::Kind::TypeMember) typeDefs.members.push_back(RefinementMember{d.label, Bound::EQ, d.ty});
    Type tx = withRefinement(ascribed, typeDefs);
    Ctx inner = located(sp, [&] { return ctx.push(z, tx); });
    require(inner, tx, ascribed, sp, "object type does not satisfy its ascription");

    std::vector<MemberDecl> required;
    if (!ascribed.isTop()) {
      Type ex = located(sp, [&] { return expose(ctx, ascribed); });
      if (!ex.isNamed()) fail(ErrorKind::InvalidType, sp, "cannot instantiate " + toString(ascribed));
      const NameDef* nd = ctx.def(ex.base.name);
      if (nd && nd->mark == ShapeMark::Shape)
        fail(ErrorKind::InvalidType, sp, "shape '" + ex.base.name + "' cannot be instantiated");
      required = membersOf(ctx, ex, z);
    }
    std::vector<MemberDecl> provided = sigOf(defs);
    for (const auto& r : required) {
      const MemberDecl* p = findMember(provided, r.label, r.kind);
      if (!p)
        fail(ErrorKind::NoSuchMember, sp, "object of type " + toString(ascribed) + " is missing member '" + r.label +
                                              "' (" + toString(r) + ")");
      located(sp, [&] {
        declMatches(inner, *p, r, sp);
        return 0;
      });
    }
    for (const auto& d : defs) {
      if (d.kind == ObjMemberDefn::Kind::Field) {
        const Path& v = pathOf(d.value);
        Type vt = located(d.span, [&] { return typePath(inner, v); });
        require(inner, vt, d.ty, d.span, "field '" + d.label + "' has the wrong type");
      } else if (d.kind == ObjMemberDefn::Kind::Method) {
        if (d.params.size() != 1)
          fail(ErrorKind::Internal, d.span, "method '" + d.label + "' must take exactly one parameter");
        std::string x = d.params[0].name;
        ExprPtr body = d.body;
        Type result = d.resultTy;
        if (inner.hasVar(x)) {
          std::set<std::string> avoidSet = inner.varNames();
          collectFreeVars(body, avoidSet);
          collectFreeVars(result, avoidSet);
          x = freshName(x, avoidSet);
          body = substPath(body, d.params[0].name, Path::mkVar(x));
          result = substPath(result, d.params[0].name, Path::mkVar(x));
        }
        typeValid(inner, d.params[0].ty, d.span);
        Ctx mctx = located(d.span, [&] { return inner.push(x, d.params[0].ty); });
        Type bt = typeExpr(mctx, body);
        require(mctx, bt, result, d.span, "body of method '" + d.label + "' has the wrong type");
      }
    }
  }

  std::optional<TypeError> subtypeDecl(const Ctx& ctx, const SubtypeEntry& s, SourceSpan sp) {
    const NameDef* l = ctx.def(s.lhsName);
    const NameDef* r = ctx.def(s.rhsName);
    if (!l || !r) {
      TypeError e;
      e.kind = ErrorKind::BadSubtypeDecl;
      e.span = sp;
      e.message = "subtype declaration mentions an undeclared name";
      return e;
    }
    // push x: n1 r1, then σ1 +σ r1 <: σ2 structurally
    std::string x = freshName("x", {});
    Ctx inner = ctx.push(x, Type::named(s.lhsName, s.lhsRefinement));
    auto lhs = mergeMembers(substPath(l->members, l->selfVar, Path::mkVar(x)), refinementAsDecls(s.lhsRefinement));
    auto rhs = substPath(r->members, r->selfVar, Path::mkVar(x));
    std::string failing;
    SubtypeOptions so;
    so.trace = opts_.trace;
    SubtypeResult res;
    try {
      res = declListSubtype(inner, lhs, rhs, so, &failing);
    } catch (const NomError& ne) {
      TypeError e;
      e.kind = ErrorKind::BadSubtypeDecl;
      e.span = sp;
      e.message = "subtype " + s.lhsName + " <: " + s.rhsName + " could not be checked: " + ne.what();
      return e;
    }
    if (res.holds) return std::nullopt;
    TypeError e;
    e.kind = ErrorKind::BadSubtypeDecl;
    e.span = sp;
    bool missing = findMember(lhs, failing, MemberDecl::Kind::TypeMember) == nullptr &&
                   findMember(lhs, failing, MemberDecl::Kind::Field) == nullptr &&
                   findMember(lhs, failing, MemberDecl::Kind::Method) == nullptr;
    e.message = "declared subtype " + s.lhsName + " <: " + s.rhsName + " does not hold: member '" + failing + "' " +
                (missing ? "is missing from " + s.lhsName : "is incompatible");
    e.trace = std::move(res.trace);
    return e;
  }

 private:
  static std::set<std::string> varsOf(const Ctx& ctx, const Type& ty) {
    std::set<std::string> s = ctx.varNames();
    collectFreeVars(ty, s);
    return s;
  }

  static const MemberDecl* findMember(const std::vector<MemberDecl>& ms, const std::string& label, MemberDecl::Kind k) {
    for (const auto& m : ms)
      if (m.label == label && m.kind == k) return &m;
    return nullptr;
  }

  // Members of an exposed named type n r at self path z: Δ(n)[self := z] +σ r.
  static std::vector<MemberDecl> membersOf(const Ctx& ctx, const Type& ex, const std::string& z) {
    const NameDef* nd = ctx.def(ex.base.name);
    if (!nd) return refinementAsDecls(ex.refinement);
    return mergeMembers(substPath(nd->members, nd->selfVar, Path::mkVar(z)), refinementAsDecls(ex.refinement));
  }

  static const Path& pathOf(const ExprPtr& e) {
    const Path* p = asPath(e);
    if (!p) fail(ErrorKind::Internal, e ? e->span : SourceSpan{}, "expression is not in A-normal form");
    return *p;
  }

  MemberDecl memberAt(const Ctx& ctx, const Path& p, const std::string& label, MemberDecl::Kind k, SourceSpan sp) {
    Type t = located(sp, [&] { return typePath(ctx, p); });
    Type ex = located(sp, [&] { return expose(ctx, t); });
    if (!ex.isNamed())
      fail(ErrorKind::NoSuchMember, sp, "cannot select '" + label + "' from " + toString(p) + " of type " + toString(t));
    auto d = tryLookupDecl(ctx, ex, p, label);
    if (!d || d->kind != k) {
      const char* what = k == MemberDecl::Kind::Field ? "field" : "method";
      fail(ErrorKind::NoSuchMember, sp, "type " + toString(ex) + " has no " + what + " '" + label + "'");
    }
    return *d;
  }

  // One member of the object's signature against one required declaration.
  void declMatches(const Ctx& ctx, const MemberDecl& p, const MemberDecl& r, SourceSpan sp) {
    switch (r.kind) {
      case MemberDecl::Kind::TypeMember:
        if (!memberOk(ctx, p.bound, p.ty, r.bound, r.ty))
          fail(ErrorKind::SubtypeFailure, sp, "definition '" + toString(p) + "' does not satisfy '" + toString(r) + "'");
        return;
      case MemberDecl::Kind::Field:
        require(ctx, p.ty, r.ty, sp, "field '" + r.label + "' is declared with an incompatible type");
        return;
      case MemberDecl::Kind::Method: {
        if (p.params.size() != 1 || r.params.size() != 1)
          fail(ErrorKind::Internal, sp, "method '" + r.label + "' must take exactly one parameter");
        require(ctx, r.params[0].ty, p.params[0].ty, sp, "parameter of method '" + r.label + "' is too narrow");
        std::set<std::string> avoidSet = ctx.varNames();
        for (const auto& v : freeVars(p.resultTy))
          if (v != p.params[0].name) avoidSet.insert(v);
        for (const auto& v : freeVars(r.resultTy))
          if (v != r.params[0].name) avoidSet.insert(v);
        std::string x = freshName(r.params[0].name, avoidSet);
        Ctx inner = ctx.push(x, r.params[0].ty);
        require(inner, substPath(p.resultTy, p.params[0].name, Path::mkVar(x)),
                substPath(r.resultTy, r.params[0].name, Path::mkVar(x)), sp,
                "result of method '" + r.label + "' is too wide");
        return;
      }
    }
  }

  CheckOptions opts_;
};

void walkNames(const Type& ty, const DefTable& delta, SourceSpan sp, std::vector<TypeError>& out,
               std::set<std::string>& reported) {
  std::set<std::string> names;
  collectNames(ty, names);
  for (const auto& n : names)
    if (!delta.count(n) && reported.insert(n).second) {
      TypeError e;
      e.kind = ErrorKind::InvalidType;
      e.span = sp;
      e.message = "unknown type name '" + n + "'";
      out.push_back(std::move(e));
    }
}

void walkExprNames(const ExprPtr& e, const DefTable& delta, std::vector<TypeError>& out, std::set<std::string>& rep) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::PathE:
      return;
    case Expr::Kind::FieldSel:
      walkExprNames(e->target, delta, out, rep);
      return;
    case Expr::Kind::MethodApp:
      walkExprNames(e->target, delta, out, rep);
      for (const auto& a : e->args) walkExprNames(a, delta, out, rep);
      return;
    case Expr::Kind::New:
      walkNames(e->ty, delta, e->span, out, rep);
      for (const auto& d : e->defs) {
        walkNames(d.ty, delta, d.span, out, rep);
        walkNames(d.resultTy, delta, d.span, out, rep);
        for (const auto& p : d.params) walkNames(p.ty, delta, d.span, out, rep);
        walkExprNames(d.value, delta, out, rep);
        walkExprNames(d.body, delta, out, rep);
      }
      return;
    case Expr::Kind::Let:
      if (e->ascription) walkNames(*e->ascription, delta, e->span, out, rep);
      walkExprNames(e->bound, delta, out, rep);
      walkExprNames(e->body, delta, out, rep);
      return;
  }
}

}  // namespace

Contexts buildContexts(const Program& p, std::vector<TypeError>* errs) {
  auto delta = std::make_shared<DefTable>();
  auto sigma = std::make_shared<SubtypeTable>();
  for (const auto& d : p.decls) {
    if (d.kind == TopDecl::Kind::Named) {
      if (delta->count(d.name)) {
        if (errs) errs->push_back(TypeError{ErrorKind::DuplicateName, d.span, "duplicate type name '" + d.name + "'", {}, {}, {}});
        continue;
      }
      (*delta)[d.name] = NameDef{d.selfVar, d.members, d.mark};
    } else {
      sigma->push_back(SubtypeEntry{d.lhsName, d.lhsRefinement, d.rhsName});
    }
  }
  return Contexts{delta, sigma};
}

Ctx makeCtx(const Contexts& c, const CheckOptions& opts) {
  Ctx ctx(c.delta, c.sigma);
  ctx.avoidFuel = opts.avoidFuel;
  return ctx;
}

std::vector<TypeError> resolveNames(const Program& p, const DefTable& delta, const std::vector<AssertDirective>& asserts) {
  std::vector<TypeError> out;
  std::set<std::string> reported;
  auto name = [&](const std::string& n, SourceSpan sp) {
    if (!delta.count(n) && reported.insert(n).second)
      out.push_back(TypeError{ErrorKind::InvalidType, sp, "unknown type name '" + n + "'", {}, {}, {}});
  };
  for (const auto& d : p.decls) {
    if (d.kind == TopDecl::Kind::Subtype) {
      name(d.lhsName, d.span);
      name(d.rhsName, d.span);
      walkNames(Type::named(d.lhsName, d.lhsRefinement), delta, d.span, out, reported);
      continue;
    }
    for (const auto& m : d.members) {
      walkNames(m.ty, delta, m.span, out, reported);
      walkNames(m.resultTy, delta, m.span, out, reported);
      for (const auto& prm : m.params) walkNames(prm.ty, delta, m.span, out, reported);
    }
  }
  walkExprNames(p.main, delta, out, reported);
  for (const auto& a : asserts) {
    walkNames(a.lhs, delta, a.span, out, reported);
    walkNames(a.rhs, delta, a.span, out, reported);
  }
  return out;
}

std::optional<TypeError> checkSubtypeDecl(const Ctx& ctx, const SubtypeEntry& entry, SourceSpan span) {
  return Checker(CheckOptions{}).subtypeDecl(ctx, entry, span);
}

void typeValid(const Ctx& ctx, const Type& ty, SourceSpan span) { Checker(CheckOptions{}).typeValid(ctx, ty, span); }

Type typeExpr(const Ctx& ctx, const ExprPtr& e, const CheckOptions& opts) { return Checker(opts).typeExpr(ctx, e); }

void typeObjDefn(const Ctx& ctx, const std::string& selfVar, const std::vector<ObjMemberDefn>& defs,
                 const Type& ascribed, SourceSpan span, const CheckOptions& opts) {
  Checker(opts).typeObjDefn(ctx, selfVar, defs, ascribed, span);
}

CheckResult checkProgram(const Program& p, const CheckOptions& opts) {
  CheckResult res;
  Contexts c = buildContexts(p, &res.errors);
  auto unresolved = resolveNames(p, *c.delta);
  res.errors.insert(res.errors.end(), unresolved.begin(), unresolved.end());
  if (!res.errors.empty()) return res;
  Ctx ctx = makeCtx(c, opts);
  Checker checker(opts);
  for (const auto& d : p.decls) {
    if (d.kind != TopDecl::Kind::Subtype) continue;
    if (auto e = checker.subtypeDecl(ctx, SubtypeEntry{d.lhsName, d.lhsRefinement, d.rhsName}, d.span))
      res.errors.push_back(std::move(*e));
  }
  if (!p.main) {
    res.errors.push_back(TypeError{ErrorKind::Internal, {}, "program has no main expression", {}, {}, {}});
    return res;
  }
  try {
    Type t = checker.typeExpr(ctx, p.main);
    if (res.errors.empty()) res.checked = CheckedProgram{p, c, t};
  } catch (const TypeCheckError& e) {
    res.errors.push_back(e.error());
  } catch (const NomError& e) {
    res.errors.push_back(TypeError{e.kind(), p.main->span, e.what(), {}, {}, {}});
  }
  return res;
}

}  // namespace nomwyv
