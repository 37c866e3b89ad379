#include "nomwyv/syntax.hpp"

#include <atomic>
#include <sstream>

namespace nomwyv {

const RefinementMember* Refinement::find(const std::string& label) const {
  for (const auto& m : members)
    if (m.label == label) return &m;
  return nullptr;
}

MemberDecl MemberDecl::typeMember(std::string t, Bound b, Type ty, ShapeMark m) {
  MemberDecl d;
  d.kind = Kind::TypeMember;
  d.mark = m;
  d.label = std::move(t);
  d.bound = b;
  d.ty = std::move(ty);
  return d;
}

MemberDecl MemberDecl::field(std::string v, Type ty) {
  MemberDecl d;
  d.kind = Kind::Field;
  d.label = std::move(v);
  d.ty = std::move(ty);
  return d;
}

MemberDecl MemberDecl::method(std::string f, std::string x, Type paramTy, Type resultTy) {
  MemberDecl d;
  d.kind = Kind::Method;
  d.label = std::move(f);
  d.params.push_back(Param{std::move(x), std::move(paramTy)});
  d.resultTy = std::move(resultTy);
  return d;
}

bool operator==(const ObjMemberDefn& a, const ObjMemberDefn& b) {
  return a.kind == b.kind && a.label == b.label && a.ty == b.ty && exprEqual(a.value, b.value) &&
         a.params == b.params && a.resultTy == b.resultTy && exprEqual(a.body, b.body);
}

bool exprEqual(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::PathE:
      return a->path == b->path;
    case Expr::Kind::FieldSel:
      return a->label == b->label && exprEqual(a->target, b->target);
    case Expr::Kind::MethodApp:
      if (a->label != b->label || !exprEqual(a->target, b->target)) return false;
      if (a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!exprEqual(a->args[i], b->args[i])) return false;
      return true;
    case Expr::Kind::New:
      return a->ty == b->ty && a->var == b->var && a->defs == b->defs;
    case Expr::Kind::Let:
      return a->var == b->var && a->ascription == b->ascription && exprEqual(a->bound, b->bound) &&
             exprEqual(a->body, b->body);
  }
  return false;
}

bool programEqual(const Program& a, const Program& b) {
  return a.decls == b.decls && exprEqual(a.main, b.main);
}

ExprPtr mkPath(Path p, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::PathE;
  e->path = std::move(p);
  e->span = sp;
  return e;
}

ExprPtr mkFieldSel(ExprPtr target, std::string v, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::FieldSel;
  e->target = std::move(target);
  e->label = std::move(v);
  e->span = sp;
  return e;
}

ExprPtr mkMethodApp(ExprPtr target, std::string f, std::vector<ExprPtr> args, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::MethodApp;
  e->target = std::move(target);
  e->label = std::move(f);
  e->args = std::move(args);
  e->span = sp;
  return e;
}

ExprPtr mkNew(Type ty, std::string self, std::vector<ObjMemberDefn> defs, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::New;
  e->ty = std::move(ty);
  e->var = std::move(self);
  e->defs = std::move(defs);
  e->span = sp;
  return e;
}

ExprPtr mkLet(std::string x, std::optional<Type> asc, ExprPtr bound, ExprPtr body, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Let;
  e->var = std::move(x);
  e->ascription = std::move(asc);
  e->bound = std::move(bound);
  e->body = std::move(body);
  e->span = sp;
  return e;
}

const Path* asPath(const ExprPtr& e) {
  if (e && e->kind == Expr::Kind::PathE) return &e->path;
  return nullptr;
}

// ---- merge ----

Refinement mergeRefinements(const Refinement& left, const Refinement& right) {
  Refinement out;
  for (const auto& m : left.members)
    if (!right.find(m.label)) out.members.push_back(m);
  for (const auto& m : right.members) out.members.push_back(m);
  return out;
}

std::vector<MemberDecl> mergeMembers(const std::vector<MemberDecl>& left,
                                     const std::vector<MemberDecl>& right) {
  std::vector<MemberDecl> out;
  for (const auto& m : left) {
    bool overridden = false;
    for (const auto& r : right)
      if (r.label == m.label) overridden = true;
    if (!overridden) out.push_back(m);
  }
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

Type withRefinement(const Type& t, const Refinement& r) {
  if (!t.isRefined() || r.empty()) return t;
  Type out = t;
  out.refinement = mergeRefinements(t.refinement, r);
  return out;
}

std::vector<MemberDecl> refinementAsDecls(const Refinement& r) {
  std::vector<MemberDecl> out;
  for (const auto& m : r.members) out.push_back(MemberDecl::typeMember(m.label, m.bound, m.ty));
  return out;
}

// ---- free variables ----

void collectFreeVars(const Type& t, std::set<std::string>& out) {
  if (!t.isRefined()) return;
  if (!t.base.isNamed() && t.base.path.isVar()) out.insert(t.base.path.var);
  for (const auto& m : t.refinement.members) collectFreeVars(m.ty, out);
}

namespace {

// Free variables of a parameter telescope followed by a result type and optional body.
void collectTelescope(const std::vector<Param>& params, const Type& result, const ExprPtr* body,
                      std::set<std::string>& out) {
  std::set<std::string> bound;
  std::set<std::string> inner;
  for (const auto& prm : params) {
    inner.clear();
    collectFreeVars(prm.ty, inner);
    for (const auto& v : inner)
      if (!bound.count(v)) out.insert(v);
    bound.insert(prm.name);
  }
  inner.clear();
  collectFreeVars(result, inner);
  if (body) collectFreeVars(*body, inner);
  for (const auto& v : inner)
    if (!bound.count(v)) out.insert(v);
}

}  // namespace

void collectFreeVars(const MemberDecl& d, std::set<std::string>& out) {
  if (d.kind == MemberDecl::Kind::Method)
    collectTelescope(d.params, d.resultTy, nullptr, out);
  else
    collectFreeVars(d.ty, out);
}

void collectFreeVars(const ObjMemberDefn& d, std::set<std::string>& out) {
  switch (d.kind) {
    case ObjMemberDefn::Kind::TypeMember:
      collectFreeVars(d.ty, out);
      break;
    case ObjMemberDefn::Kind::Field:
      collectFreeVars(d.ty, out);
      collectFreeVars(d.value, out);
      break;
    case ObjMemberDefn::Kind::Method:
      collectTelescope(d.params, d.resultTy, &d.body, out);
      break;
  }
}

void collectFreeVars(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::PathE:
      if (e->path.isVar()) out.insert(e->path.var);
      break;
    case Expr::Kind::FieldSel:
      collectFreeVars(e->target, out);
      break;
    case Expr::Kind::MethodApp:
      collectFreeVars(e->target, out);
      for (const auto& a : e->args) collectFreeVars(a, out);
      break;
    case Expr::Kind::New: {
      collectFreeVars(e->ty, out);
      std::set<std::string> inner;
      for (const auto& d : e->defs) collectFreeVars(d, inner);
      inner.erase(e->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case Expr::Kind::Let: {
      if (e->ascription) collectFreeVars(*e->ascription, out);
      collectFreeVars(e->bound, out);
      std::set<std::string> inner;
      collectFreeVars(e->body, inner);
      inner.erase(e->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

std::set<std::string> freeVars(const Type& t) {
  std::set<std::string> out;
  collectFreeVars(t, out);
  return out;
}

std::set<std::string> freeVars(const ExprPtr& e) {
  std::set<std::string> out;
  collectFreeVars(e, out);
  return out;
}

bool mentionsVar(const Type& t, const std::string& x) {
  if (!t.isRefined()) return false;
  if (t.base.kind == BaseType::Kind::PathSel && t.base.path.isVar(x)) return true;
  for (const auto& m : t.refinement.members)
    if (mentionsVar(m.ty, x)) return true;
  return false;
}

namespace {

bool typeMentionsLoc(const Type& t) {
  if (!t.isRefined()) return false;
  if (!t.base.isNamed() && !t.base.path.isVar()) return true;
  for (const auto& m : t.refinement.members)
    if (typeMentionsLoc(m.ty)) return true;
  return false;
}

}  // namespace

bool mentionsLoc(const ExprPtr& e) {
  if (!e) return false;
  switch (e->kind) {
    case Expr::Kind::PathE:
      return !e->path.isVar();
    case Expr::Kind::FieldSel:
      return mentionsLoc(e->target);
    case Expr::Kind::MethodApp:
      if (mentionsLoc(e->target)) return true;
      for (const auto& a : e->args)
        if (mentionsLoc(a)) return true;
      return false;
    case Expr::Kind::New:
      if (typeMentionsLoc(e->ty)) return true;
      for (const auto& d : e->defs) {
        if (typeMentionsLoc(d.ty) || typeMentionsLoc(d.resultTy)) return true;
        for (const auto& p : d.params)
          if (typeMentionsLoc(p.ty)) return true;
        if (mentionsLoc(d.value) || mentionsLoc(d.body)) return true;
      }
      return false;
    case Expr::Kind::Let:
      if (e->ascription && typeMentionsLoc(*e->ascription)) return true;
      return mentionsLoc(e->bound) || mentionsLoc(e->body);
  }
  return false;
}

void collectNames(const Type& t, std::set<std::string>& out) {
  if (!t.isRefined()) return;
  if (t.base.isNamed()) out.insert(t.base.name);
  for (const auto& m : t.refinement.members) collectNames(m.ty, out);
}

std::string freshName(const std::string& base, const std::set<std::string>& avoid) {
  static std::atomic<std::uint64_t> counter{0};
  if (!avoid.count(base)) return base;
  for (;;) {
    std::string cand = base + std::to_string(++counter);
    if (!avoid.count(cand)) return cand;
  }
}

// ---- substitution ----

Type substPath(const Type& t, const std::string& x, const Path& p) {
  if (!t.isRefined()) return t;
  Type out = t;
  if (!out.base.isNamed() && out.base.path.isVar(x)) out.base.path = p;
  for (auto& m : out.refinement.members) m.ty = substPath(m.ty, x, p);
  return out;
}

Refinement substPath(const Refinement& r, const std::string& x, const Path& p) {
  Refinement out = r;
  for (auto& m : out.members) m.ty = substPath(m.ty, x, p);
  return out;
}

namespace {

// Substitutes into a binder telescope. Stops at a binder named x; renames a binder that
// would capture p.
void substTelescope(std::vector<Param>& params, Type& result, ExprPtr* body, const std::string& x,
                    const Path& p) {
  for (size_t i = 0; i < params.size(); ++i) {
    params[i].ty = substPath(params[i].ty, x, p);
    if (params[i].name == x) return;
    if (p.isVar(params[i].name)) {
      std::set<std::string> avoid{x, p.var};
      for (const auto& q : params) avoid.insert(q.name);
      collectTelescope(params, result, body, avoid);
      collectFreeVars(result, avoid);
      if (body) collectFreeVars(*body, avoid);
      std::string old = params[i].name;
      std::string fresh = freshName(old, avoid);
      Path fp = Path::mkVar(fresh);
      for (size_t j = i + 1; j < params.size(); ++j) params[j].ty = substPath(params[j].ty, old, fp);
      result = substPath(result, old, fp);
      if (body) *body = substPath(*body, old, fp);
      params[i].name = fresh;
    }
  }
  result = substPath(result, x, p);
  if (body) *body = substPath(*body, x, p);
}

}  // namespace

MemberDecl substPath(const MemberDecl& d, const std::string& x, const Path& p) {
  MemberDecl out = d;
  if (d.kind == MemberDecl::Kind::Method)
    substTelescope(out.params, out.resultTy, nullptr, x, p);
  else
    out.ty = substPath(d.ty, x, p);
  return out;
}

std::vector<MemberDecl> substPath(const std::vector<MemberDecl>& ds, const std::string& x,
                                  const Path& p) {
  std::vector<MemberDecl> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(substPath(d, x, p));
  return out;
}

ObjMemberDefn substPath(const ObjMemberDefn& d, const std::string& x, const Path& p) {
  ObjMemberDefn out = d;
  switch (d.kind) {
    case ObjMemberDefn::Kind::TypeMember:
      out.ty = substPath(d.ty, x, p);
      break;
    case ObjMemberDefn::Kind::Field:
      out.ty = substPath(d.ty, x, p);
      out.value = substPath(d.value, x, p);
      break;
    case ObjMemberDefn::Kind::Method:
      substTelescope(out.params, out.resultTy, &out.body, x, p);
      break;
  }
  return out;
}

ExprPtr substPath(const ExprPtr& e, const std::string& x, const Path& p) {
  if (!e) return e;
  if (p.isVar(x)) return e;
  switch (e->kind) {
    case Expr::Kind::PathE:
      if (e->path.isVar(x)) return mkPath(p, e->span);
      return e;
    case Expr::Kind::FieldSel:
      return mkFieldSel(substPath(e->target, x, p), e->label, e->span);
    case Expr::Kind::MethodApp: {
      std::vector<ExprPtr> args;
      for (const auto& a : e->args) args.push_back(substPath(a, x, p));
      return mkMethodApp(substPath(e->target, x, p), e->label, std::move(args), e->span);
    }
    case Expr::Kind::New: {
      Type ty = substPath(e->ty, x, p);
      if (e->var == x) return mkNew(ty, e->var, e->defs, e->span);
      std::string self = e->var;
      std::vector<ObjMemberDefn> defs = e->defs;
      if (p.isVar(self)) {
        std::set<std::string> avoid{x, p.var};
        for (const auto& d : defs) collectFreeVars(d, avoid);
        std::string fresh = freshName(self, avoid);
        for (auto& d : defs) d = substPath(d, self, Path::mkVar(fresh));
        self = fresh;
      }
      for (auto& d : defs) d = substPath(d, x, p);
      return mkNew(ty, self, std::move(defs), e->span);
    }
    case Expr::Kind::Let: {
      std::optional<Type> asc;
      if (e->ascription) asc = substPath(*e->ascription, x, p);
      ExprPtr bound = substPath(e->bound, x, p);
      if (e->var == x) return mkLet(e->var, asc, bound, e->body, e->span);
      std::string v = e->var;
      ExprPtr body = e->body;
      if (p.isVar(v)) {
        std::set<std::string> avoid{x, p.var};
        collectFreeVars(body, avoid);
        std::string fresh = freshName(v, avoid);
        body = substPath(body, v, Path::mkVar(fresh));
        v = fresh;
      }
      return mkLet(v, asc, bound, substPath(body, x, p), e->span);
    }
  }
  return e;
}

std::vector<MemberDecl> sigOf(const std::vector<ObjMemberDefn>& defs) {
  std::vector<MemberDecl> out;
  for (const auto& d : defs) {
    MemberDecl m;
    m.label = d.label;
    m.span = d.span;
    switch (d.kind) {
      case ObjMemberDefn::Kind::TypeMember:
        m.kind = MemberDecl::Kind::TypeMember;
        m.bound = Bound::EQ;
        m.ty = d.ty;
        break;
      case ObjMemberDefn::Kind::Field:
        m.kind = MemberDecl::Kind::Field;
        m.ty = d.ty;
        break;
      case ObjMemberDefn::Kind::Method:
        m.kind = MemberDecl::Kind::Method;
        m.params = d.params;
        m.resultTy = d.resultTy;
        break;
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---- printing ----

std::string toString(Bound b) {
  switch (b) {
    case Bound::LE:
      return "<=";
    case Bound::GE:
      return ">=";
    case Bound::EQ:
      return "=";
  }
  return "?";
}

std::string toString(const Path& p) {
  if (p.isVar()) return p.var;
  return "#" + std::to_string(p.loc);
}

std::string toString(const BaseType& b) {
  if (b.isNamed()) return b.name;
  return toString(b.path) + "." + b.label;
}

std::string toString(const Refinement& r) {
  if (r.empty()) return "{}";
  std::string s = "{ ";
  for (size_t i = 0; i < r.members.size(); ++i) {
    if (i) s += ", ";
    const auto& m = r.members[i];
    s += "type " + m.label + " " + toString(m.bound) + " " + toString(m.ty);
  }
  return s + " }";
}

std::string toString(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Top:
      return "Top";
    case Type::Kind::Bottom:
      return "Bot";
    case Type::Kind::Refined:
      if (t.refinement.empty()) return toString(t.base);
      return toString(t.base) + " " + toString(t.refinement);
  }
  return "?";
}

namespace {

std::string paramsToString(const std::vector<Param>& params) {
  std::string s = "(";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += params[i].name + ": " + toString(params[i].ty);
  }
  return s + ")";
}

std::string pad(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

}  // namespace

std::string toString(const MemberDecl& d) {
  switch (d.kind) {
    case MemberDecl::Kind::TypeMember:
      return std::string(d.mark == ShapeMark::Shape ? "@shape " : "") + "type " + d.label + " " +
             toString(d.bound) + " " + toString(d.ty);
    case MemberDecl::Kind::Field:
      return "val " + d.label + ": " + toString(d.ty);
    case MemberDecl::Kind::Method:
      return "def " + d.label + paramsToString(d.params) + ": " + toString(d.resultTy);
  }
  return "?";
}

std::string toString(const ObjMemberDefn& d, int indent) {
  switch (d.kind) {
    case ObjMemberDefn::Kind::TypeMember:
      return "type " + d.label + " = " + toString(d.ty);
    case ObjMemberDefn::Kind::Field:
      return "val " + d.label + ": " + toString(d.ty) + " = " + toString(d.value, indent);
    case ObjMemberDefn::Kind::Method:
      return "def " + d.label + paramsToString(d.params) + ": " + toString(d.resultTy) + " =\n" +
             pad(indent + 1) + toString(d.body, indent + 1);
  }
  return "?";
}

std::string toString(const ExprPtr& e, int indent) {
  if (!e) return "<missing>";
  switch (e->kind) {
    case Expr::Kind::PathE:
      return toString(e->path);
    case Expr::Kind::FieldSel: {
      std::string t = toString(e->target, indent);
      if (!asPath(e->target)) t = "(" + t + ")";
      return t + "." + e->label;
    }
    case Expr::Kind::MethodApp: {
      std::string t = toString(e->target, indent);
      if (!asPath(e->target)) t = "(" + t + ")";
      std::string s = t + "." + e->label + "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) s += ", ";
        s += toString(e->args[i], indent);
      }
      return s + ")";
    }
    case Expr::Kind::New: {
      std::string s = "new " + toString(e->ty) + " { " + e->var + " =>";
      if (e->defs.empty()) return s + " }";
      for (const auto& d : e->defs) s += "\n" + pad(indent + 1) + toString(d, indent + 1);
      return s + "\n" + pad(indent) + "}";
    }
    case Expr::Kind::Let: {
      std::string s = "let " + e->var;
      if (e->ascription) s += ": " + toString(*e->ascription);
      s += " = " + toString(e->bound, indent + 1) + " in\n" + pad(indent) + toString(e->body, indent);
      return s;
    }
  }
  return "?";
}

std::string toString(const TopDecl& d) {
  if (d.kind == TopDecl::Kind::Subtype) {
    std::string s = "subtype " + d.lhsName;
    if (!d.lhsRefinement.empty()) s += " " + toString(d.lhsRefinement);
    return s + " <: " + d.rhsName;
  }
  std::ostringstream os;
  if (d.mark == ShapeMark::Shape) os << "@shape ";
  os << "name " << d.name << " { " << d.selfVar << " =>\n";
  for (const auto& m : d.members) os << "  " << toString(m) << "\n";
  os << "}";
  return os.str();
}

std::string toString(const Program& p) {
  std::string s;
  for (const auto& d : p.decls) s += toString(d) + "\n";
  if (p.main) s += toString(p.main) + "\n";
  return s;
}

}  // namespace nomwyv
