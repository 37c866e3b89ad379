#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nomwyv {

enum class Bound { LE, GE, EQ };
enum class ShapeMark { Material, Shape };
using LocId = std::uint64_t;

// Source position. Spans are metadata: they never take part in structural equality.
struct SourceSpan {
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::uint32_t length = 0;
  bool operator==(const SourceSpan&) const { return true; }
};

struct Path {
  enum class Kind { Var, Loc };
  Kind kind = Kind::Var;
  std::string var;
  LocId loc = 0;

  static Path mkVar(std::string x) { return Path{Kind::Var, std::move(x), 0}; }
  static Path mkLoc(LocId l) { return Path{Kind::Loc, {}, l}; }
  bool isVar() const { return kind == Kind::Var; }
  bool isVar(const std::string& x) const { return kind == Kind::Var && var == x; }
  bool operator==(const Path&) const = default;
};

struct BaseType {
  enum class Kind { Named, PathSel };
  Kind kind = Kind::Named;
  std::string name;   // Named
  Path path;          // PathSel
  std::string label;  // PathSel

  static BaseType named(std::string n) { return BaseType{Kind::Named, std::move(n), {}, {}}; }
  static BaseType pathSel(Path p, std::string t) {
    return BaseType{Kind::PathSel, {}, std::move(p), std::move(t)};
  }
  bool isNamed() const { return kind == Kind::Named; }
  bool operator==(const BaseType&) const = default;
};

struct RefinementMember;

struct Refinement {
  std::vector<RefinementMember> members;

  bool empty() const { return members.empty(); }
  const RefinementMember* find(const std::string& label) const;
  bool operator==(const Refinement& o) const;
};

struct Type {
  enum class Kind { Bottom, Top, Refined };
  Kind kind = Kind::Top;
  BaseType base;
  Refinement refinement;

  static Type top() { return Type{Kind::Top, {}, {}}; }
  static Type bottom() { return Type{Kind::Bottom, {}, {}}; }
  static Type named(std::string n, Refinement r = {}) {
    return Type{Kind::Refined, BaseType::named(std::move(n)), std::move(r)};
  }
  static Type pathSel(Path p, std::string t, Refinement r = {}) {
    return Type{Kind::Refined, BaseType::pathSel(std::move(p), std::move(t)), std::move(r)};
  }
  static Type refined(BaseType b, Refinement r = {}) {
    return Type{Kind::Refined, std::move(b), std::move(r)};
  }
  bool isTop() const { return kind == Kind::Top; }
  bool isBottom() const { return kind == Kind::Bottom; }
  bool isRefined() const { return kind == Kind::Refined; }
  bool isNamed() const { return isRefined() && base.isNamed(); }
  bool isPathSel() const { return isRefined() && !base.isNamed(); }
  bool operator==(const Type& o) const;
};

struct RefinementMember {
  std::string label;
  Bound bound = Bound::EQ;
  Type ty;
  bool operator==(const RefinementMember&) const = default;
};

inline bool Refinement::operator==(const Refinement& o) const { return members == o.members; }
inline bool Type::operator==(const Type& o) const {
  if (kind != o.kind) return false;
  if (kind != Kind::Refined) return true;
  return base == o.base && refinement == o.refinement;
}

struct Param {
  std::string name;
  Type ty;
  bool operator==(const Param&) const = default;
};

struct MemberDecl {
  enum class Kind { TypeMember, Field, Method };
  Kind kind = Kind::TypeMember;
  ShapeMark mark = ShapeMark::Material;  // type members only
  std::string label;
  Bound bound = Bound::EQ;  // type members only
  Type ty;                  // type-member bound type, or field type
  std::vector<Param> params;  // methods; exactly one after desugaring
  Type resultTy;              // methods
  SourceSpan span;

  static MemberDecl typeMember(std::string t, Bound b, Type ty, ShapeMark m = ShapeMark::Material);
  static MemberDecl field(std::string v, Type ty);
  static MemberDecl method(std::string f, std::string x, Type paramTy, Type resultTy);
  bool operator==(const MemberDecl&) const = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct ObjMemberDefn {
  enum class Kind { TypeMember, Field, Method };
  Kind kind = Kind::TypeMember;
  std::string label;
  Type ty;                    // type defn, or field type
  ExprPtr value;              // field value (a path in ANF)
  std::vector<Param> params;  // methods
  Type resultTy;
  ExprPtr body;
  SourceSpan span;
};
bool operator==(const ObjMemberDefn& a, const ObjMemberDefn& b);

struct Expr {
  enum class Kind { PathE, FieldSel, MethodApp, New, Let };
  Kind kind = Kind::PathE;
  SourceSpan span;
  Path path;                    // PathE
  ExprPtr target;               // FieldSel, MethodApp
  std::string label;            // FieldSel field, MethodApp method
  std::vector<ExprPtr> args;    // MethodApp
  Type ty;                      // New
  std::string var;              // New self variable, Let binder
  std::vector<ObjMemberDefn> defs;  // New
  std::optional<Type> ascription;   // Let
  ExprPtr bound;                // Let
  ExprPtr body;                 // Let
};
bool exprEqual(const ExprPtr& a, const ExprPtr& b);

ExprPtr mkPath(Path p, SourceSpan sp = {});
ExprPtr mkFieldSel(ExprPtr target, std::string v, SourceSpan sp = {});
ExprPtr mkMethodApp(ExprPtr target, std::string f, std::vector<ExprPtr> args, SourceSpan sp = {});
ExprPtr mkNew(Type ty, std::string self, std::vector<ObjMemberDefn> defs, SourceSpan sp = {});
ExprPtr mkLet(std::string x, std::optional<Type> asc, ExprPtr bound, ExprPtr body, SourceSpan sp = {});

// The path inside a PathE expression, or null if e is not a bare path.
const Path* asPath(const ExprPtr& e);

struct TopDecl {
  enum class Kind { Named, Subtype };
  Kind kind = Kind::Named;
  SourceSpan span;
  // Named
  ShapeMark mark = ShapeMark::Material;
  std::string name;
  std::string selfVar;
  std::vector<MemberDecl> members;
  // Subtype
  std::string lhsName;
  Refinement lhsRefinement;
  std::string rhsName;
  bool operator==(const TopDecl&) const = default;
};

struct Program {
  std::vector<TopDecl> decls;
  ExprPtr main;
};
bool programEqual(const Program& a, const Program& b);

struct AssertDirective {
  Type lhs;
  Type rhs;
  bool expected = true;
  SourceSpan span;
};

struct NameDef {
  std::string selfVar;
  std::vector<MemberDecl> members;
  ShapeMark mark = ShapeMark::Material;
};
using DefTable = std::map<std::string, NameDef>;

struct SubtypeEntry {
  std::string lhsName;
  Refinement lhsRefinement;
  std::string rhsName;
};
using SubtypeTable = std::vector<SubtypeEntry>;

using VarEnv = std::vector<std::pair<std::string, Type>>;
using StoreEnv = std::map<LocId, Type>;

// merge operators: right wins on clashes; left survivors first, then right members
Refinement mergeRefinements(const Refinement& left, const Refinement& right);
std::vector<MemberDecl> mergeMembers(const std::vector<MemberDecl>& left,
                                     const std::vector<MemberDecl>& right);
// τ +r r. Top and Bot carry no refinement, so merging into them is a no-op.
Type withRefinement(const Type& t, const Refinement& r);
std::vector<MemberDecl> refinementAsDecls(const Refinement& r);

Type substPath(const Type& t, const std::string& x, const Path& p);
Refinement substPath(const Refinement& r, const std::string& x, const Path& p);
MemberDecl substPath(const MemberDecl& d, const std::string& x, const Path& p);
std::vector<MemberDecl> substPath(const std::vector<MemberDecl>& ds, const std::string& x, const Path& p);
ObjMemberDefn substPath(const ObjMemberDefn& d, const std::string& x, const Path& p);
ExprPtr substPath(const ExprPtr& e, const std::string& x, const Path& p);

void collectFreeVars(const Type& t, std::set<std::string>& out);
void collectFreeVars(const MemberDecl& d, std::set<std::string>& out);
void collectFreeVars(const ObjMemberDefn& d, std::set<std::string>& out);
void collectFreeVars(const ExprPtr& e, std::set<std::string>& out);
std::set<std::string> freeVars(const Type& t);
std::set<std::string> freeVars(const ExprPtr& e);
bool mentionsVar(const Type& t, const std::string& x);
bool mentionsLoc(const ExprPtr& e);

// Names of declared types referenced by a type, including nested refinements.
void collectNames(const Type& t, std::set<std::string>& out);

std::vector<MemberDecl> sigOf(const std::vector<ObjMemberDefn>& defs);

// A variant of base not in avoid; the base itself when free, else base with a numeric suffix.
std::string freshName(const std::string& base, const std::set<std::string>& avoid);

std::string toString(Bound b);
std::string toString(const Path& p);
std::string toString(const BaseType& b);
std::string toString(const Type& t);
std::string toString(const Refinement& r);
std::string toString(const MemberDecl& d);
std::string toString(const ObjMemberDefn& d, int indent = 0);
std::string toString(const ExprPtr& e, int indent = 0);
std::string toString(const TopDecl& d);
std::string toString(const Program& p);

}  // namespace nomwyv
