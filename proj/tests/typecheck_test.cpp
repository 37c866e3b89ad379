#include <gtest/gtest.h>

#include "nomwyv/parser.hpp"
#include "nomwyv/typecheck.hpp"
#include "support.hpp"

using namespace nomwyv;
using nwt::ty;

namespace {

Program parsed(const std::string& text, bool prelude = false) {
  std::string all = text;
  if (prelude) all = nwt::readCorpus("lib/prelude.nwyv") + "\n" + text;
  ParseResult r = parseProgram({"<test>", all});
  EXPECT_TRUE(r.ok()) << render(r.diagnostics);
  return desugarMultiParams(r.program);
}

Program corpus(const std::string& rel) {
  auto c = nwt::compileCorpus(rel, Session::Stage::Resolve);
  EXPECT_EQ(c.status, Status::Ok) << c.rendered();
  return c.c.program;
}

TEST(Contexts, Verbatim) {
  Program p = desugarMultiParams(parseProgram({"immutable_set", nwt::readCorpus("immutable_set.nwyv")}).program);
  Contexts c = buildContexts(p);
  EXPECT_EQ(c.delta->size(), 3u);
  ASSERT_EQ(c.sigma->size(), 1u);
  EXPECT_EQ(c.sigma->at(0).lhsName, "Fruit");
  EXPECT_EQ(c.delta->at("Equatable").mark, ShapeMark::Shape);
  EXPECT_EQ(c.delta->at("Set").selfVar, "self");

  Program empty;
  empty.main = mkNew(Type::top(), "z", {});
  Contexts e = buildContexts(empty);
  EXPECT_TRUE(e.delta->empty());
  EXPECT_TRUE(e.sigma->empty());
}

TEST(Contexts, DuplicateName) {
  Program p;
  TopDecl d;
  d.name = "Fruit";
  d.selfVar = "f";
  p.decls = {d, d};
  p.main = mkNew(Type::top(), "z", {});
  std::vector<TypeError> errs;
  buildContexts(p, &errs);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].kind, ErrorKind::DuplicateName);
  auto r = checkProgram(p);
  EXPECT_FALSE(r.ok());
}

TEST(SubtypeDecl, Checks) {
  Program immutable_set = corpus("immutable_set.nwyv");
  Contexts c = buildContexts(immutable_set);
  Ctx ctx = makeCtx(c);
  EXPECT_FALSE(checkSubtypeDecl(ctx, SubtypeEntry{"Fruit", {}, "Equatable"}).has_value());
  auto bad = checkSubtypeDecl(ctx, SubtypeEntry{"Fruit", {}, "Set"});
  ASSERT_TRUE(bad.has_value());
  EXPECT_EQ(bad->kind, ErrorKind::BadSubtypeDecl);
  EXPECT_TRUE(bad->message.find("ElemT") != std::string::npos || bad->message.find("insert") != std::string::npos)
      << bad->message;

  Contexts l2 = buildContexts(corpus("int_list.nwyv"));
  EXPECT_FALSE(checkSubtypeDecl(makeCtx(l2), l2.sigma->at(0)).has_value());
}

TEST(TypeValid, Examples) {
  Ctx ctx = makeCtx(buildContexts(corpus("immutable_set.nwyv")));
  EXPECT_NO_THROW(typeValid(ctx, ty("Set { type ElemT = Fruit }")));
  EXPECT_NO_THROW(typeValid(ctx, Type::top()));
  EXPECT_NO_THROW(typeValid(ctx, Type::bottom()));
  try {
    typeValid(ctx, ty("Set { type ElemT = Top }"));
    FAIL();
  } catch (const TypeCheckError& e) {
    EXPECT_EQ(e.error().kind, ErrorKind::InvalidType);
    EXPECT_NE(e.error().message.find("ElemT"), std::string::npos);
  }
  EXPECT_THROW(typeValid(ctx, ty("Fruit { type Nope = Fruit }")), TypeCheckError);
}

TEST(TypeExpr, ImmutableSetMain) {
  Program p = corpus("immutable_set.nwyv");
  Ctx ctx = makeCtx(buildContexts(p));
  Type t = typeExpr(ctx, p.main);
  EXPECT_EQ(toString(t), "Set { type ElemT = Fruit }");
  // syntax-directed: the same term always gets the same type
  EXPECT_EQ(typeExpr(ctx, p.main), t);
}

TEST(TypeExpr, LetAvoidsBinder) {
  Program p = parsed(
      "name Fruit { f => type EqT = Fruit } "
      "let y = new Fruit { f => type EqT = Fruit } in let z = y in z");
  Type t = typeExpr(makeCtx(buildContexts(p)), p.main);
  EXPECT_EQ(t, Type::named("Fruit"));
  // a path-dependent result is avoided to the member's bound
  Program q = parsed("name Fruit { f => type EqT = Fruit  val me: f.EqT } "
                     "let y = new Fruit { f => type EqT = Fruit  val me: f.EqT = f } in y.me");
  EXPECT_EQ(typeExpr(makeCtx(buildContexts(q)), q.main), Type::named("Fruit"));
}

TEST(TypeExpr, LetRenamesShadowedBinder) {
  Program p = parsed(
      "name A { a => type T <= Top  val v: a.T } "
      "let x = new A { a => type T = A  val v: a.T = a } in "
      "let x = x.v in x");
  Type t = typeExpr(makeCtx(buildContexts(p)), p.main);
  EXPECT_TRUE(freeVars(t).empty()) << toString(t);
}

TEST(TypeExpr, CardMismatch) {
  auto c = nwt::compileCorpus("reject/bank_mismatch.nwyv", Session::Stage::Separation);
  ASSERT_EQ(c.status, Status::Ok) << c.rendered();
  CheckResult r = checkProgram(c.c.program);
  ASSERT_FALSE(r.ok());
  const TypeError& e = r.errors.front();
  EXPECT_EQ(e.kind, ErrorKind::SubtypeFailure);
  ASSERT_TRUE(e.expected && e.actual && e.trace);
  EXPECT_EQ(toString(*e.expected), "pnc.Card");
  EXPECT_EQ(toString(*e.actual), "chase.Card");
  // the report is honest: the failing query replays to false
  auto ctx = makeCtx(buildContexts(c.c.program));
  EXPECT_FALSE(isSubtype(ctx, *e.actual, *e.expected).holds);
  Diagnostic d = toDiagnostic(e, "bank.nwyv");
  EXPECT_EQ(d.code, "E0303");
  EXPECT_EQ(d.message.rfind("SubtypeFailure: ", 0), 0u) << d.message;
}

TEST(TypeExpr, Errors) {
  Ctx ctx = makeCtx(buildContexts(corpus("immutable_set.nwyv")));
  auto kindOf = [&](const std::string& src) {
    ParseResult r = parseProgram({"<t>", src});
    EXPECT_TRUE(r.ok()) << render(r.diagnostics);
    try {
      typeExpr(ctx, r.program.main);
    } catch (const TypeCheckError& e) {
      return e.error().kind;
    }
    return ErrorKind::Internal;
  };
  EXPECT_EQ(kindOf("y"), ErrorKind::UnboundPath);
  EXPECT_EQ(kindOf("let s = new Set { type ElemT = Fruit } { s => type ElemT = Fruit  def insert(e: s.ElemT): "
                   "Set { type ElemT = s.ElemT } = s } in s.nope"),
            ErrorKind::NoSuchMember);
  EXPECT_EQ(kindOf("new Equatable { e => type EqT = Bot  def equals(x: e.EqT): Bool = x }"), ErrorKind::InvalidType);
  EXPECT_EQ(kindOf("let s = new Set { type ElemT = Fruit } { s => type ElemT = Fruit  def insert(e: s.ElemT): "
                   "Set { type ElemT = s.ElemT } = s } in s.insert(s)"),
            ErrorKind::SubtypeFailure);
}

TEST(ObjDefn, Examples) {
  Ctx ctx = makeCtx(buildContexts(corpus("immutable_set.nwyv")));
  EXPECT_NO_THROW(typeObjDefn(ctx, "z", {}, Type::top()));
  ObjMemberDefn eqt;
  eqt.kind = ObjMemberDefn::Kind::TypeMember;
  eqt.label = "EqT";
  eqt.ty = Type::named("Fruit");
  try {
    typeObjDefn(ctx, "f", {eqt}, Type::named("Fruit"));
    FAIL() << "Fruit without its value members";
  } catch (const TypeCheckError& e) {
    EXPECT_NE(e.error().message.find("missing member"), std::string::npos) << e.error().message;
  }
}

TEST(ObjDefn, WidthExtraMembersAllowed) {
  Program p = parsed("name A { a => } new A { a => type Extra = A  val me: A = a }");
  EXPECT_TRUE(checkProgram(p).ok());
}

TEST(Program, CorpusAccepted) {
  EXPECT_EQ(toString(checkProgram(corpus("immutable_set.nwyv")).checked->mainType), "Set { type ElemT = Fruit }");
  for (const auto& f : nwt::acceptedPrograms()) {
    CheckResult r = checkProgram(corpus(f));
    EXPECT_TRUE(r.ok()) << f << ": " << (r.errors.empty() ? "" : r.errors[0].message);
  }
  EXPECT_EQ(toString(checkProgram(corpus("iset.nwyv")).checked->mainType), "ISet");
  EXPECT_EQ(toString(checkProgram(corpus("cloneable.nwyv")).checked->mainType), "String");
}

TEST(Program, ReportsEverySubtypeDecl) {
  Program p = parsed("name A { a => type T <= Top } name B { b => } name C { c => } "
                     "subtype B <: A subtype C <: A new Top { z => }");
  CheckResult r = checkProgram(p);
  ASSERT_EQ(r.errors.size(), 2u);
  for (const auto& e : r.errors) EXPECT_EQ(e.kind, ErrorKind::BadSubtypeDecl);
}

TEST(Program, LoopFailsAvoidance) {
  CheckResult r = checkProgram(corpus("reject/loop.nwyv"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.errors[0].kind, ErrorKind::AvoidFailure);
  EXPECT_EQ(errorCode(r.errors[0].kind), "E0306");
  CheckOptions small;
  small.avoidFuel = 2;
  EXPECT_EQ(checkProgram(corpus("reject/loop.nwyv"), small).errors[0].kind, ErrorKind::AvoidFailure);
}

TEST(Program, ResolveNames) {
  Program p = parsed("name A { a => type T <= Missing } new Nope { z => }");
  auto errs = resolveNames(p, *buildContexts(p).delta);
  EXPECT_EQ(errs.size(), 2u);
  for (const auto& e : errs) EXPECT_EQ(e.kind, ErrorKind::InvalidType);
}

TEST(ErrorCodes, Table) {
  EXPECT_EQ(errorCode(ErrorKind::UnboundPath), "E0301");
  EXPECT_EQ(errorCode(ErrorKind::NoSuchMember), "E0302");
  EXPECT_EQ(errorCode(ErrorKind::SubtypeFailure), "E0303");
  EXPECT_EQ(errorCode(ErrorKind::InvalidType), "E0304");
  EXPECT_EQ(errorCode(ErrorKind::BadSubtypeDecl), "E0305");
  EXPECT_EQ(errorCode(ErrorKind::AvoidFailure), "E0306");
  EXPECT_EQ(errorCode(ErrorKind::DuplicateName), "E0307");
}

}  // namespace
