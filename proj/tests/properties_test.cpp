#include <gtest/gtest.h>

#include "properties.hpp"

namespace {

void expectHolds(const nwt::PropertyResult& r) {
  EXPECT_EQ(r.failures, 0u) << r.name << ": " << r.firstFailure;
  EXPECT_EQ(r.cases, nwt::kPropertyCases) << r.name;
  EXPECT_GT(r.nontrivial, 0u) << r.name << " was vacuous";
  std::cout << "[ property ] " << r.name << ": " << r.cases << " cases, " << r.nontrivial << " nontrivial, "
            << r.skipped << " skipped, " << r.seconds << " s\n";
}

TEST(Properties, Reflexivity) { expectHolds(nwt::propReflexivity(11)); }
TEST(Properties, Transitivity) { expectHolds(nwt::propTransitivity(23)); }
TEST(Properties, BottomInversion) { expectHolds(nwt::propBottomInversion(37)); }
TEST(Properties, Exposure) { expectHolds(nwt::propExposure(41)); }
TEST(Properties, Avoidance) { expectHolds(nwt::propAvoid(53)); }

TEST(Properties, BoundTables) {
  auto r = nwt::propBoundTables();
  EXPECT_EQ(r.failures, 0u) << r.firstFailure;
  EXPECT_EQ(r.nontrivial, 18u);
}

}  // namespace
