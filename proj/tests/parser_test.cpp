#include <gtest/gtest.h>

#include <random>

#include "nomwyv/parser.hpp"
#include "support.hpp"

using namespace nomwyv;

namespace {

ParseResult parse(const std::string& text) { return parseProgram({"<test>", text}); }

bool hasCode(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const auto& d : ds)
    if (d.code == code) return true;
  return false;
}

int count(const Program& p, TopDecl::Kind k) {
  int n = 0;
  for (const auto& d : p.decls) n += d.kind == k;
  return n;
}

TEST(Parse, ImmutableSet) {
  ParseResult r = parseProgram({"immutable_set", nwt::readCorpus("immutable_set.nwyv")});
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  EXPECT_EQ(count(r.program, TopDecl::Kind::Named), 3);
  EXPECT_EQ(count(r.program, TopDecl::Kind::Subtype), 1);
  ASSERT_TRUE(r.program.main);
  EXPECT_EQ(r.program.main->kind, Expr::Kind::Let);
  EXPECT_EQ(r.program.main->body->kind, Expr::Kind::Let);
  const TopDecl& eq = r.program.decls[0];
  EXPECT_EQ(eq.name, "Equatable");
  EXPECT_EQ(eq.mark, ShapeMark::Shape);
  EXPECT_EQ(eq.selfVar, "self");
  const TopDecl& sub = r.program.decls[2];
  EXPECT_EQ(sub.lhsName, "Fruit");
  EXPECT_EQ(sub.rhsName, "Equatable");
  EXPECT_TRUE(sub.lhsRefinement.empty());
}

TEST(Parse, EmptyFileNeedsMain) {
  ParseResult r = parse("");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(hasCode(r.diagnostics, "E0107"));
  EXPECT_TRUE(r.program.decls.empty());
}

TEST(Parse, IntListAssert) {
  ParseResult r = parseProgram({"int_list", nwt::readCorpus("int_list.nwyv")});
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  // List and IntList, plus the Int the assert mentions
  EXPECT_EQ(count(r.program, TopDecl::Kind::Named), 3);
  EXPECT_EQ(count(r.program, TopDecl::Kind::Subtype), 1);
  ASSERT_EQ(r.asserts.size(), 1u);
  EXPECT_TRUE(r.asserts[0].expected);
  EXPECT_EQ(r.asserts[0].lhs, Type::named("IntList"));
  EXPECT_EQ(toString(r.asserts[0].rhs), "List { type T = Int }");
}

TEST(Parse, Bounds) {
  ParseResult r = parse("name N { z => type a <= Top  type b >= Bot  type c = N  @shape type d <= N } new Top { z => }");
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  const auto& ms = r.program.decls[0].members;
  ASSERT_EQ(ms.size(), 4u);
  EXPECT_EQ(ms[0].bound, Bound::LE);
  EXPECT_TRUE(ms[0].ty.isTop());
  EXPECT_EQ(ms[1].bound, Bound::GE);
  EXPECT_TRUE(ms[1].ty.isBottom());
  EXPECT_EQ(ms[2].bound, Bound::EQ);
  EXPECT_EQ(ms[3].mark, ShapeMark::Shape);
}

TEST(Parse, NegativeAssertAndComments) {
  ParseResult r = parse("// leading\nname A { a => } // trailing\nassert A </: Bot\nnew A { a => }");
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  ASSERT_EQ(r.asserts.size(), 1u);
  EXPECT_FALSE(r.asserts[0].expected);
}

TEST(Parse, ArrowMethodAlias) {
  ParseResult a = parse("name C { c => def clone(u: C): c.t  type t <= Top } new Top { z => }");
  ParseResult b = parse("name C { c => def clone : C u -> c.t  type t <= Top } new Top { z => }");
  ASSERT_TRUE(a.ok()) << render(a.diagnostics);
  ASSERT_TRUE(b.ok()) << render(b.diagnostics);
  EXPECT_TRUE(programEqual(a.program, b.program));
}

TEST(Parse, Rejections) {
  EXPECT_TRUE(hasCode(parse("name A { a => } name A { b => } new A { a => }").diagnostics, "E0104"));
  EXPECT_TRUE(hasCode(parse("name A { a => type t <= Top  val t: A } new Top { z => }").diagnostics, "E0106"));
  EXPECT_TRUE(hasCode(parse("new Top { z => } ").diagnostics, "E0104") == false);
  EXPECT_TRUE(hasCode(parse("#3").diagnostics, "E0105"));
  EXPECT_FALSE(parse("name A$b { a => } new Top { z => }").ok());
  EXPECT_FALSE(parse("name A { a => } new Top { z => } extra").ok());
  EXPECT_TRUE(hasCode(parse("name A { a => } ?").diagnostics, "E0101"));
}

TEST(Parse, ParsesStandaloneTypes) {
  auto t = parseType("Set { type ElemT <= Equatable { type EqT = x.ElemT } }");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->base.name, "Set");
  std::vector<Diagnostic> ds;
  EXPECT_FALSE(parseType("Set {", &ds).has_value());
  EXPECT_FALSE(ds.empty());
}

TEST(Anf, NestedCallRejected) {
  ParseResult r = parse("name A { a => def f(x: A): A } let a = new A { s => def f(x: A): A = x } in a.f(a.f(a))");
  ASSERT_FALSE(r.ok());
  ASSERT_TRUE(hasCode(r.diagnostics, "E0103"));
  bool mentionsPath = false;
  for (const auto& d : r.diagnostics) mentionsPath |= d.message.find("must be a path") != std::string::npos;
  EXPECT_TRUE(mentionsPath);
}

TEST(Anf, AcceptsPaths) {
  ParseResult immutable_set = parseProgram({"immutable_set", nwt::readCorpus("immutable_set.nwyv")});
  EXPECT_TRUE(validateAnf(immutable_set.program).empty());
  ParseResult r = parse("name A { a => def f(x: A): A } let y = new A { s => def f(x: A): A = x } in y.f(y)");
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  EXPECT_TRUE(validateAnf(r.program).empty());
}

const MemberDecl* method(const Program& p, const std::string& owner, const std::string& label) {
  for (const auto& d : p.decls)
    if (d.kind == TopDecl::Kind::Named && d.name == owner)
      for (const auto& m : d.members)
        if (m.label == label) return &m;
  return nullptr;
}

const TopDecl* named(const Program& p, const std::string& n) {
  for (const auto& d : p.decls)
    if (d.kind == TopDecl::Kind::Named && d.name == n) return &d;
  return nullptr;
}

TEST(Desugar, ISetMethods) {
  ParseResult r = parseProgram({"iset", nwt::readCorpus("iset.nwyv")});
  ASSERT_TRUE(r.ok()) << render(r.diagnostics);
  std::vector<Diagnostic> ds;
  Program p = desugarMultiParams(r.program, &ds);
  ASSERT_TRUE(ds.empty()) << render(ds);

  const MemberDecl* ins = method(p, "SET_CONS", "Insert");
  ASSERT_NE(ins, nullptr);
  ASSERT_EQ(ins->params.size(), 1u);
  ASSERT_TRUE(ins->params[0].ty.isNamed());
  std::string pair = ins->params[0].ty.base.name;
  EXPECT_EQ(pair.rfind("Tup$Insert$2$", 0), 0u) << pair;
  const TopDecl* rec = named(p, pair);
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->mark, ShapeMark::Material);
  ASSERT_EQ(rec->members.size(), 2u);
  EXPECT_EQ(rec->members[0], MemberDecl::field("s", Type::named("ISet")));
  EXPECT_EQ(rec->members[1], MemberDecl::field("n", Type::named("Int")));

  const MemberDecl* empty = method(p, "SET_CONS", "Empty");
  ASSERT_NE(empty, nullptr);
  ASSERT_EQ(empty->params.size(), 1u);
  const TopDecl* unit = named(p, empty->params[0].ty.base.name);
  ASSERT_NE(unit, nullptr);
  EXPECT_TRUE(unit->members.empty());

  // unary methods are left alone
  const MemberDecl* contains = method(p, "ISet", "contains");
  ASSERT_NE(contains, nullptr);
  EXPECT_EQ(*contains, *method(r.program, "ISet", "contains"));
}

TEST(Desugar, Idempotent) {
  for (const auto& f : nwt::acceptedPrograms()) {
    ParseResult r = parseProgram({f, nwt::readCorpus(f)});
    ASSERT_TRUE(r.ok()) << f;
    Program once = desugarMultiParams(r.program);
    Program twice = desugarMultiParams(once);
    EXPECT_TRUE(programEqual(once, twice)) << f;
  }
}

TEST(Desugar, DeterministicNames) {
  const std::string src = "name A { a => def f(x: A, y: A): A } new Top { z => }";
  Program a = desugarMultiParams(parse(src).program);
  Program b = desugarMultiParams(parse(src).program);
  EXPECT_TRUE(programEqual(a, b));
}

// Every byte sequence yields a program or diagnostics, never an exception.
TEST(Parse, NeverThrowsOnMutations) {
  std::mt19937_64 rng(99);
  std::vector<std::string> seeds;
  for (const auto& f : nwt::acceptedPrograms()) seeds.push_back(nwt::readCorpus(f));
  const std::string alphabet = "{}()<=>:.,@#$ \n\tabzNTBot=>/-";
  for (int i = 0; i < 1000; ++i) {
    std::string s = seeds[rng() % seeds.size()];
    int edits = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < edits && !s.empty(); ++k) {
      std::size_t at = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(at, 1 + rng() % 6); break;
        case 1: s.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[at] = static_cast<char>(rng() % 256); break;
      }
    }
    EXPECT_NO_THROW({
      ParseResult r = parse(s);
      if (r.ok()) desugarMultiParams(r.program);
    });
  }
}

}  // namespace
