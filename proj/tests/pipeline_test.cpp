#include <gtest/gtest.h>

#include <json.hpp>

#include "support.hpp"

using namespace nomwyv;

namespace {

TEST(Pipeline, CheckPrintsMainType) {
  Session s = nwt::sessionFor("immutable_set.nwyv");
  Outcome o = s.check();
  EXPECT_EQ(o.status, Status::Ok) << render(o.diagnostics);
  EXPECT_EQ(o.output, "main : Set { type ElemT = Fruit }\n");
}

TEST(Pipeline, RejectHeadersHold) {
  for (const auto& f : nwt::rejectedPrograms()) {
    auto want = nwt::expectedExit(nwt::readCorpus(f));
    ASSERT_TRUE(want.has_value()) << f;
    Session s = nwt::sessionFor(f);
    EXPECT_EQ(static_cast<int>(s.check().status), *want) << f;
  }
  for (const auto& f : nwt::acceptedPrograms()) {
    Session s = nwt::sessionFor(f);
    Outcome o = s.check();
    EXPECT_EQ(o.status, Status::Ok) << f << "\n" << render(o.diagnostics);
  }
}

TEST(Pipeline, DiagnosticCodes) {
  auto codeOf = [](const std::string& f) {
    Session s = nwt::sessionFor(f);
    Outcome o = s.check();
    return o.diagnostics.empty() ? std::string() : o.diagnostics.front().code;
  };
  EXPECT_EQ(codeOf("reject/bank_mismatch.nwyv"), "E0303");
  EXPECT_EQ(codeOf("reject/loop.nwyv"), "E0306");
  EXPECT_EQ(codeOf("reject/immutable_set_material.nwyv"), "E0204");
  EXPECT_EQ(codeOf("reject/shape_lower.nwyv"), "E0201");
  EXPECT_EQ(codeOf("reject/parse_error.nwyv"), "E0103");
}

TEST(Pipeline, UnguardedCycleNamesMember) {
  Session s = nwt::sessionFor("reject/immutable_set_material.nwyv");
  Outcome o = s.check();
  ASSERT_EQ(o.status, Status::Separation);
  std::string text = render(o.diagnostics);
  EXPECT_NE(text.find("UnguardedCycle"), std::string::npos) << text;
  EXPECT_NE(text.find("Set::ElemT"), std::string::npos) << text;
}

TEST(Pipeline, SeparationPreemptsTyping) {
  // both a shape in a lower bound and an ill-typed main
  Session s;
  s.loadSource("<t>", "@shape name E { e => } name N { n => type T >= E } let x = new N { n => type T = E } in x.nope");
  EXPECT_EQ(s.check().status, Status::Separation);
}

TEST(Pipeline, Asserts) {
  Session yes = nwt::sessionFor("int_list.nwyv");
  EXPECT_EQ(yes.check().status, Status::Ok);
  PipelineOptions off;
  off.expansion = false;
  Session no = nwt::sessionFor("int_list.nwyv", off);
  Outcome o = no.check();
  EXPECT_EQ(o.status, Status::AssertFailed);
  ASSERT_FALSE(o.diagnostics.empty());
  EXPECT_EQ(o.diagnostics[0].code, "E0501");

  Session neg;
  neg.loadSource("<t>", "name A { a => } name B { b => } assert A </: B assert A <: Top new Top { z => }");
  EXPECT_EQ(neg.check().status, Status::Ok);
  Session bad;
  bad.loadSource("<t>", "name A { a => } assert A </: Top new Top { z => }");
  EXPECT_EQ(bad.check().status, Status::AssertFailed);
}

TEST(Pipeline, SubtypeCommand) {
  Session s = nwt::sessionFor("int_list.nwyv");
  Outcome o = s.subtype("IntList", "List { type T = Int }");
  EXPECT_EQ(o.status, Status::Ok);
  EXPECT_EQ(o.output, "true\n");
  s.options.expansion = false;
  o = s.subtype("IntList", "List { type T = Int }");
  EXPECT_EQ(o.status, Status::AssertFailed);
  EXPECT_EQ(o.output, "false\n");
  EXPECT_EQ(s.subtype("IntList {", "Top").status, Status::Parse);
  EXPECT_EQ(s.subtype("Nope", "Top").status, Status::TypeError);
}

TEST(Pipeline, RunOutput) {
  Session s = nwt::sessionFor("iset.nwyv");
  Outcome o = s.run(64);
  ASSERT_EQ(o.status, Status::Ok) << render(o.diagnostics);
  EXPECT_EQ(o.output, "result : #14\ntype : ISet\nmembers : isEmpty, contains, insert, union\nheap : 15 objects\n");
  Outcome stuck = s.run(0);
  EXPECT_EQ(stuck.status, Status::Stuck);
  EXPECT_EQ(stuck.output, "stuck\n");
  ASSERT_FALSE(stuck.diagnostics.empty());
  EXPECT_EQ(stuck.diagnostics[0].code, "E0401");
  EXPECT_EQ(s.run(std::nullopt).output, o.output);
}

TEST(Pipeline, RunRefusesIllTyped) {
  Session s = nwt::sessionFor("reject/loop.nwyv");
  EXPECT_EQ(s.run(16).status, Status::TypeError);
}

TEST(Pipeline, GraphFormats) {
  Session s = nwt::sessionFor("equatable_members.nwyv");
  Outcome dot = s.graph(GraphKind::Sdg);
  EXPECT_EQ(dot.status, Status::Ok);
  EXPECT_EQ(dot.output, *readFile(nwt::corpusPath("../golden/equatable_members.dot")));
  s.options.format = OutputFormat::Json;
  Outcome js = s.graph(GraphKind::Sdg);
  auto j = nlohmann::json::parse(js.output);
  ASSERT_EQ(j["edges"].size(), 4u);
  EXPECT_EQ(j["edges"][2]["label"][0], "Equatable");
  EXPECT_EQ(j["edges"][2]["variance"], "<=");
  auto wrapped = nlohmann::json::parse(outcomeToJson(js));
  EXPECT_EQ(wrapped["status"], 0);
  EXPECT_TRUE(wrapped["output"].is_object());
  EXPECT_EQ(wrapped["output"]["edges"].size(), 4u);
}

TEST(Pipeline, JsonDiagnostics) {
  Session s = nwt::sessionFor("reject/bank_mismatch.nwyv");
  Outcome o = s.check();
  auto j = nlohmann::json::parse(outcomeToJson(o));
  EXPECT_EQ(j["status"], 1);
  EXPECT_TRUE(j["output"].is_string());
  ASSERT_EQ(j["diagnostics"].size(), 1u);
  const auto& d = j["diagnostics"][0];
  EXPECT_EQ(d["code"], "E0303");
  EXPECT_EQ(d["severity"], "error");
  EXPECT_GT(d["line"].get<int>(), 0);
  EXPECT_TRUE(d["message"].get<std::string>().find("pnc.Card") != std::string::npos);
}

TEST(Pipeline, Deterministic) {
  for (const auto& f : nwt::acceptedPrograms()) {
    Session a = nwt::sessionFor(f), b = nwt::sessionFor(f);
    EXPECT_EQ(a.check().output, b.check().output) << f;
    EXPECT_EQ(a.run(128).output, b.run(128).output) << f;
    EXPECT_EQ(a.graph(GraphKind::Sdg).output, b.graph(GraphKind::Sdg).output) << f;
  }
}

TEST(Pipeline, TraceAddsDerivation) {
  PipelineOptions o;
  o.trace = true;
  Session s = nwt::sessionFor("reject/bank_mismatch.nwyv", o);
  std::string text = render(s.check().diagnostics);
  EXPECT_NE(text.find("S-"), std::string::npos) << text;
}

TEST(Pipeline, Fuzz) {
  Session s;
  Outcome o = s.fuzz(1, 100);
  EXPECT_EQ(o.status, Status::Ok) << o.output;
  EXPECT_NE(o.output.find("unknown"), std::string::npos);
}

TEST(Pipeline, MissingInput) {
  Session s;
  std::string err;
  EXPECT_FALSE(s.loadFile("/nonexistent/x.nwyv", &err));
  EXPECT_FALSE(err.empty());
  EXPECT_NE(s.check().status, Status::Ok);
}

}  // namespace
