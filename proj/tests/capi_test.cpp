#include <gtest/gtest.h>

#include <string>

#include "nomwyv/nomwyv.h"

namespace {

std::string corpus(const std::string& rel) { return std::string(NOMWYV_CORPUS_DIR) + "/" + rel; }

struct Session {
  nomwyv_session* s = nomwyv_session_create();
  ~Session() { nomwyv_session_destroy(s); }
  std::string out() const { return nomwyv_output(s); }
  std::string diags() const { return nomwyv_diagnostics(s); }
};

TEST(CApi, FreshSessionBuffers) {
  Session s;
  ASSERT_NE(s.s, nullptr);
  EXPECT_STREQ(nomwyv_output(s.s), "");
  EXPECT_STREQ(nomwyv_diagnostics(s.s), "");
  EXPECT_STRNE(nomwyv_version(), "");
  EXPECT_STREQ(nomwyv_status_name(NOMWYV_STUCK), "stuck");
  EXPECT_STREQ(nomwyv_status_name(NOMWYV_OK), "ok");
}

TEST(CApi, NullHandles) {
  EXPECT_EQ(nomwyv_check(nullptr), NOMWYV_USAGE);
  EXPECT_EQ(nomwyv_load_file(nullptr, "x"), NOMWYV_USAGE);
  Session s;
  EXPECT_EQ(nomwyv_load_file(s.s, nullptr), NOMWYV_USAGE);
  EXPECT_EQ(nomwyv_subtype(s.s, nullptr, "Top"), NOMWYV_USAGE);
  nomwyv_session_destroy(nullptr);
}

TEST(CApi, CheckImmutableSet) {
  Session s;
  ASSERT_EQ(nomwyv_load_prelude(s.s, corpus("lib/prelude.nwyv").c_str()), NOMWYV_OK);
  ASSERT_EQ(nomwyv_load_file(s.s, corpus("immutable_set.nwyv").c_str()), NOMWYV_OK);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_OK) << s.diags();
  EXPECT_EQ(s.out(), "main : Set { type ElemT = Fruit }\n");
}

TEST(CApi, Expansion) {
  Session s;
  ASSERT_EQ(nomwyv_load_file(s.s, corpus("int_list.nwyv").c_str()), NOMWYV_OK);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_OK);
  nomwyv_set_expansion(s.s, 0);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_ASSERT_FAILED);
  EXPECT_NE(s.diags().find("E0501"), std::string::npos);
  EXPECT_EQ(nomwyv_subtype(s.s, "IntList", "List { type T = Int }"), NOMWYV_ASSERT_FAILED);
  EXPECT_EQ(s.out(), "false\n");
}

TEST(CApi, RunAndFuel) {
  Session s;
  nomwyv_load_prelude(s.s, corpus("lib/prelude.nwyv").c_str());
  nomwyv_load_file(s.s, corpus("iset.nwyv").c_str());
  EXPECT_EQ(nomwyv_run(s.s, 64), NOMWYV_OK);
  EXPECT_NE(s.out().find("type : ISet"), std::string::npos);
  EXPECT_EQ(nomwyv_run(s.s, 0), NOMWYV_STUCK);
  EXPECT_EQ(s.out(), "stuck\n");
  EXPECT_EQ(nomwyv_run(s.s, -1), NOMWYV_OK);
}

TEST(CApi, AvoidFuelOption) {
  Session s;
  nomwyv_load_file(s.s, corpus("reject/loop.nwyv").c_str());
  EXPECT_EQ(nomwyv_set_avoid_fuel(s.s, 4), NOMWYV_OK);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_TYPE_ERROR);
  EXPECT_NE(s.diags().find("AvoidFailure"), std::string::npos);
}

TEST(CApi, JsonFormat) {
  Session s;
  nomwyv_load_file(s.s, corpus("equatable_members.nwyv").c_str());
  ASSERT_EQ(nomwyv_set_format(s.s, NOMWYV_FORMAT_JSON), NOMWYV_OK);
  EXPECT_EQ(nomwyv_graph(s.s, NOMWYV_GRAPH_SDG), NOMWYV_OK);
  EXPECT_EQ(s.out().rfind("{", 0), 0u);
  EXPECT_NE(s.out().find("\"status\": 0"), std::string::npos);
  EXPECT_EQ(s.diags(), "");
  EXPECT_EQ(nomwyv_set_format(s.s, static_cast<nomwyv_format>(9)), NOMWYV_USAGE);
}

TEST(CApi, SourceAndErrors) {
  Session s;
  EXPECT_EQ(nomwyv_load_file(s.s, "/nonexistent.nwyv"), NOMWYV_IO);
  EXPECT_NE(s.diags().find("E0001"), std::string::npos);
  EXPECT_EQ(nomwyv_load_source(s.s, "inline", "name A { a => } new A { a => }"), NOMWYV_OK);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_OK);
  EXPECT_EQ(s.out(), "main : A\n");
  EXPECT_EQ(nomwyv_load_source(s.s, "inline", "new A {"), NOMWYV_OK);
  EXPECT_EQ(nomwyv_check(s.s), NOMWYV_PARSE);
  EXPECT_NE(s.diags().find("inline:"), std::string::npos);
}

TEST(CApi, Fuzz) {
  Session s;
  EXPECT_EQ(nomwyv_fuzz(s.s, 2, 50), NOMWYV_OK) << s.out();
  EXPECT_NE(s.out().find("agree"), std::string::npos);
}

}  // namespace
