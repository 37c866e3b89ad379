#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "nomwyv/oracle.hpp"
#include "nomwyv/subtype.hpp"
#include "support.hpp"

using namespace nomwyv;
using nwt::ty;

namespace {

Type sel(const std::string& x, const std::string& t) { return Type::pathSel(Path::mkVar(x), t); }
RefinementMember mem(const std::string& l, Bound b, Type t) { return RefinementMember{l, b, std::move(t)}; }

class Corpus : public ::testing::Test {
 protected:
  Ctx load(const std::string& rel, const VarEnv& g = {}) {
    c_ = nwt::compileCorpus(rel, Session::Stage::Resolve);
    EXPECT_EQ(c_.status, Status::Ok) << c_.rendered();
    return nwt::ctxOf(c_.c, g);
  }
  nwt::Compiled c_;
};

TEST_F(Corpus, BasicRules) {
  Ctx c = load("immutable_set.nwyv");
  EXPECT_TRUE(isSubtype(c, Type::bottom(), Type::named("Fruit")).holds);
  EXPECT_TRUE(isSubtype(c, Type::named("Fruit"), Type::top()).holds);
  EXPECT_TRUE(isSubtype(c, Type::named("Fruit"), Type::named("Equatable")).holds);
  EXPECT_FALSE(isSubtype(c, Type::named("Equatable"), Type::named("Fruit")).holds);
  EXPECT_FALSE(isSubtype(c, Type::named("Fruit"), Type::named("Set")).holds);
  EXPECT_FALSE(isSubtype(c, Type::top(), Type::bottom()).holds);
}

TEST_F(Corpus, ExpansionNeeded) {
  Ctx c = load("int_list.nwyv");
  Type lhs = Type::named("IntList"), rhs = ty("List { type T = Int }");
  EXPECT_FALSE(isSubtype(c, lhs, rhs).holds);
  EXPECT_TRUE(check(c, lhs, rhs).holds);
  EXPECT_EQ(depth(rhs), 1);
  EXPECT_EQ(depth(lhs), 0);
  EXPECT_EQ(expand1(c, BaseType::named("IntList"), 1), ty("IntList { type T = Int }"));
  EXPECT_EQ(expand(c, lhs, 1), ty("IntList { type T = Int }"));
  EXPECT_EQ(expand(c, lhs, 0), lhs);
  EXPECT_EQ(expand(c, Type::top(), 3), Type::top());
  EXPECT_EQ(expand(c, Type::bottom(), 3), Type::bottom());
}

TEST_F(Corpus, CheckBasics) {
  Ctx c = load("immutable_set.nwyv");
  EXPECT_FALSE(check(c, Type::named("Fruit"), Type::named("Set")).holds);
  for (const auto& t : {ty("Set { type ElemT = Fruit }"), Type::named("Equatable"), ty("Equatable { type EqT >= Fruit }")})
    EXPECT_TRUE(check(c, t, t).holds) << toString(t);
}

TEST(Depth, Nesting) {
  EXPECT_EQ(depth(Type::top()), 0);
  EXPECT_EQ(depth(ty("A { type T = B { type U <= C } }")), 2);
  EXPECT_EQ(depth(ty("A { type T = B, type U <= C }")), 1);
}

TEST_F(Corpus, MemberSubtyping) {
  Ctx c = load("int_list.nwyv");
  Type i = Type::named("Int");
  EXPECT_TRUE(memberSubtype(c, mem("t", Bound::EQ, i), mem("t", Bound::LE, i)));
  EXPECT_FALSE(memberSubtype(c, mem("t", Bound::LE, i), mem("t", Bound::EQ, i)));
  EXPECT_TRUE(memberSubtype(c, mem("t", Bound::GE, Type::bottom()), mem("t", Bound::GE, Type::bottom())));
  EXPECT_TRUE(memberSubtype(c, mem("t", Bound::EQ, i), mem("t", Bound::GE, Type::bottom())));
  EXPECT_FALSE(memberSubtype(c, mem("t", Bound::GE, i), mem("t", Bound::LE, Type::top())));
  EXPECT_TRUE(memberSubtype(c, mem("t", Bound::EQ, i), mem("t", Bound::EQ, i)));
  EXPECT_FALSE(memberSubtype(c, mem("t", Bound::EQ, i), mem("t", Bound::EQ, Type::top())));
}

TEST_F(Corpus, RefinementSubtyping) {
  Ctx c = load("int_list.nwyv");
  Refinement intT{{mem("T", Bound::EQ, Type::named("Int"))}};
  EXPECT_TRUE(refinementSubtype(c, intT, {}));
  EXPECT_TRUE(refinementSubtype(c, intT, Refinement{{mem("T", Bound::LE, Type::named("Int"))}}));
  EXPECT_FALSE(refinementSubtype(c, {}, intT));
  EXPECT_TRUE(refinementSubtype(c, {}, {}));
}

TEST_F(Corpus, DeclLists) {
  Ctx base = load("immutable_set.nwyv");
  Ctx c = base.push("x", Type::named("Fruit"));
  auto fruit = substPath(c.def("Fruit")->members, "self", Path::mkVar("x"));
  auto eq = substPath(c.def("Equatable")->members, "self", Path::mkVar("x"));
  EXPECT_TRUE(declListSubtype(c, fruit, eq).holds);
  EXPECT_TRUE(declListSubtype(c, fruit, {}).holds);
  EXPECT_TRUE(declListSubtype(c, {}, {}).holds);
  std::string failing;
  auto set = substPath(c.def("Set")->members, "self", Path::mkVar("x"));
  EXPECT_FALSE(declListSubtype(c, fruit, set, {}, &failing).holds);
  EXPECT_FALSE(failing.empty());

  auto f1 = MemberDecl::method("f", "x", Type::named("Fruit"), Type::top());
  auto f2 = MemberDecl::method("f", "y", Type::bottom(), Type::top());
  EXPECT_TRUE(declListSubtype(c, {f1}, {f2}).holds);
  EXPECT_FALSE(declListSubtype(c, {f2}, {f1}).holds);
  EXPECT_TRUE(declListSubtype(c, {MemberDecl::field("v", Type::named("Fruit"))},
                              {MemberDecl::field("v", Type::named("Equatable"))}).holds);
  EXPECT_FALSE(declListSubtype(c, {MemberDecl::field("v", Type::named("Equatable"))},
                               {MemberDecl::field("v", Type::named("Fruit"))}).holds);
}

TEST_F(Corpus, DependentMethodResults) {
  Ctx c = load("immutable_set.nwyv");
  // results may mention the parameter; renaming must line the two up
  auto a = MemberDecl::method("f", "p", Type::named("Set"), sel("p", "ElemT"));
  auto b = MemberDecl::method("f", "q", Type::named("Set"), Type::named("Equatable"));
  EXPECT_TRUE(declListSubtype(c, {a}, {b}).holds);
  auto d = MemberDecl::method("f", "q", Type::named("Set"), sel("q", "ElemT"));
  EXPECT_TRUE(declListSubtype(c, {a}, {d}).holds);
}

TEST_F(Corpus, PathSelections) {
  Ctx c = load("immutable_set.nwyv", {{"g", ty("Set { type ElemT = Fruit }")}, {"b", Type::named("Set")}});
  EXPECT_TRUE(isSubtype(c, sel("g", "ElemT"), Type::named("Fruit")).holds);
  EXPECT_TRUE(isSubtype(c, sel("b", "ElemT"), Type::named("Equatable")).holds);
  EXPECT_TRUE(isSubtype(c, sel("b", "ElemT"), ty("Equatable { type EqT = b.ElemT }")).holds);
  EXPECT_FALSE(isSubtype(c, Type::named("Fruit"), sel("b", "ElemT")).holds);
  EXPECT_FALSE(isSubtype(c, sel("b", "ElemT"), Type::named("Fruit")).holds);
}

TEST(NameUp, ConditionalEdges) {
  auto c = nwt::compileSource(
      "name Int { i => } name L { l => type T <= Top } name I { i => type T <= Top } "
      "subtype I { type T = Int } <: L new Top { z => }",
      Session::Stage::Resolve);
  ASSERT_EQ(c.status, Status::Ok) << c.rendered();
  Ctx ctx = nwt::ctxOf(c.c);
  EXPECT_FALSE(isSubtype(ctx, Type::named("I"), Type::named("L")).holds);
  EXPECT_TRUE(isSubtype(ctx, ty("I { type T = Int }"), Type::named("L")).holds);
  // r is carried onto the supertype verbatim
  EXPECT_TRUE(isSubtype(ctx, ty("I { type T = Int }"), ty("L { type T <= Int }")).holds);
}

TEST_F(Corpus, TraceMatchesSteps) {
  Ctx c = load("immutable_set.nwyv", {{"b", Type::named("Set")}});
  SubtypeOptions o;
  o.trace = true;
  auto r = isSubtype(c, sel("b", "ElemT"), Type::named("Equatable"), o);
  ASSERT_TRUE(r.holds);
  ASSERT_TRUE(r.trace.tree.has_value());
  std::function<std::uint64_t(const TraceNode&)> count = [&](const TraceNode& n) {
    std::uint64_t k = 1;
    for (const auto& ch : n.children) k += count(ch);
    return k;
  };
  EXPECT_EQ(count(*r.trace.tree), r.trace.steps);
  std::string text = r.trace.render();
  EXPECT_NE(text.find("S-Lower"), std::string::npos) << text;
  EXPECT_NE(text.find("S-Refine"), std::string::npos) << text;
}

TEST_F(Corpus, CeilingIsReported) {
  Ctx c = load("immutable_set.nwyv", {{"b", Type::named("Set")}});
  SubtypeOptions o;
  o.stepCeiling = 1;
  auto r = isSubtype(c, sel("b", "ElemT"), Type::named("Equatable"), o);
  EXPECT_TRUE(r.trace.ceilingHit);
  EXPECT_FALSE(r.holds);
}

TEST_F(Corpus, Energy) {
  Ctx c = load("immutable_set.nwyv", {{"x", Type::named("Fruit")}});
  auto g = buildSdg(c.delta(), c.sigma());
  MeasureTable mt = computeMeasures(c.delta(), c.sigma(), g);
  EXPECT_EQ(typeEnergy(c, mt, Type::bottom()), 0u);
  EXPECT_EQ(typeEnergy(c, mt, Type::top()), 0u);
  EXPECT_EQ(pathEnergy(c, mt, BaseType::named("Fruit")), 1u);
  EXPECT_EQ(pathEnergy(c, mt, BaseType::named("Equatable")), 2u);
  std::uint64_t want = mt.e.at(SdgNode::nameNode("Fruit")) * mt.m.at(SdgNode::pseudo("Fruit", "EqT")) +
                       mt.a.at(SdgNode::pseudo("Fruit", "EqT"));
  EXPECT_EQ(pathEnergy(c, mt, BaseType::pathSel(Path::mkVar("x"), "EqT")), want);
  EXPECT_EQ(typeEnergy(c, mt, ty("Set { type ElemT = Fruit }")),
            pathEnergy(c, mt, BaseType::named("Set")) + pathEnergy(c, mt, BaseType::named("Fruit")));
}

// The negative memo prunes work but never changes an answer.
TEST(Memo, SameAnswersWithoutMemo) {
  std::mt19937_64 rng(17);
  int related = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.maxNames = 5;
    Program p = genProgram(cfg);
    GenQuery q = genQuery(p, rng, cfg);
    Ctx ctx = makeCtx(buildContexts(p));
    for (const auto& [x, t] : q.gamma) ctx = ctx.push(x, t);
    SubtypeOptions off;
    off.memo = false;
    auto a = isSubtype(ctx, q.lhs, q.rhs);
    auto b = isSubtype(ctx, q.lhs, q.rhs, off);
    EXPECT_EQ(a.holds, b.holds) << toString(p) << toString(q.lhs) << " <: " << toString(q.rhs);
    EXPECT_LE(a.trace.steps, b.trace.steps);
    related += a.holds;
  }
  EXPECT_GT(related, 0);
}

// isSubtype(t1, t2) and upcast(t2) = t2' give isSubtype(t1, t2').
TEST(Upcast, Semitransitive) {
  std::mt19937_64 rng(29);
  int exercised = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.maxNames = 5;
    Program p = genProgram(cfg);
    GenQuery q = genQuery(p, rng, cfg);
    Ctx ctx = makeCtx(buildContexts(p));
    for (const auto& [x, t] : q.gamma) ctx = ctx.push(x, t);
    std::vector<Type> pool = {q.lhs, q.rhs, Type::bottom()};
    for (const auto& [x, t] : q.gamma)
      if (const NameDef* d = t.isNamed() ? ctx.def(t.base.name) : nullptr)
        for (const auto& m : d->members)
          if (m.kind == MemberDecl::Kind::TypeMember) pool.push_back(sel(x, m.label));
    for (const auto& t2 : pool) {
      auto up = tryUpcast(ctx, t2);
      if (!up) continue;
      for (const auto& t1 : pool) {
        if (!isSubtype(ctx, t1, t2).holds) continue;
        ++exercised;
        EXPECT_TRUE(isSubtype(ctx, t1, *up).holds) << toString(t1) << " <: " << toString(t2) << " ~> " << toString(*up);
      }
    }
  }
  EXPECT_GT(exercised, 100);
}

}  // namespace
