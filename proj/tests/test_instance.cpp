#include <gtest/gtest.h>

#include <set>

#include "lrmc/errors.hpp"
#include "lrmc/instance.hpp"
#include "test_util.hpp"

using namespace lrmc;
using namespace lrmc::testing;

namespace {

std::set<std::pair<int, int>> omega_of(const CompletionProblem& p) {
  std::set<std::pair<int, int>> out;
  for (std::size_t e = 0; e < p.num_observed(); ++e)
    out.insert({p.pattern().row[e], p.pattern().col[e]});
  return out;
}

const char* kFig2Text = R"({
  "K": 5,
  "streams": [1, 1, 1, 1, 1],
  "destinations": [
    {"desired": [1], "cached": [2, 5]},
    {"desired": [2], "cached": [1, 5]},
    {"desired": [3], "cached": [2, 4]},
    {"desired": [4], "cached": [2, 3]},
    {"desired": [5], "cached": [1, 3, 4]}
  ]
}
)";

}  // namespace

TEST(Instance, Fig2IsValid) {
  const auto inst = fig2_instance();
  EXPECT_EQ(inst.num_messages(), 5);
  EXPECT_EQ(inst.num_destinations(), 5);
  EXPECT_TRUE(inst.is_cached(0, 1));
  EXPECT_TRUE(inst.is_cached(4, 3));
  EXPECT_FALSE(inst.is_cached(0, 2));
  EXPECT_TRUE(inst.uniform_streams());
  EXPECT_EQ(inst.total_streams(), 5);
}

TEST(Instance, NoCacheIsValid) {
  EXPECT_NO_THROW(build_instance(2, {1, 1}, {{{0}, {}}, {{1}, {}}}));
}

TEST(Instance, ValidationErrors) {
  EXPECT_THROW(build_instance(3, {1, 1, 1}, {{{0}, {0, 1}}}), OverlapError);
  EXPECT_THROW(build_instance(3, {1, 1, 1}, {{{3}, {}}}), IndexError);
  EXPECT_THROW(build_instance(3, {1, 1, 1}, {{{0}, {-1}}}), IndexError);
  EXPECT_THROW(build_instance(3, {1, 1, 1}, {{{}, {1}}}), EmptyDesired);
  EXPECT_THROW(build_instance(2, {1, 0}, {{{0}, {}}}), RangeError);
  EXPECT_THROW(build_instance(2, {1}, {{{0}, {}}}), RangeError);
}

TEST(Instance, BuildCanonicalizesSets) {
  const auto a = build_instance(3, {1, 1, 1}, {{{0}, {2, 1, 2}}});
  const auto b = build_instance(3, {1, 1, 1}, {{{0}, {1, 2}}});
  EXPECT_EQ(a, b);
}

TEST(Instance, Fig2OmegaAndTarget) {
  const auto p = build_completion_problem(fig2_instance());
  ASSERT_EQ(p.rows(), 5);
  ASSERT_EQ(p.cols(), 5);
  // 1-based pairs transcribed from the worked example.
  const std::set<std::pair<int, int>> expected1 = {
      {1, 1}, {1, 3}, {1, 4}, {2, 2}, {2, 3}, {2, 4}, {3, 1},
      {3, 3}, {3, 5}, {4, 1}, {4, 4}, {4, 5}, {5, 2}, {5, 5}};
  std::set<std::pair<int, int>> expected;
  for (auto [r, c] : expected1) expected.insert({r - 1, c - 1});
  EXPECT_EQ(omega_of(p), expected);
  EXPECT_LT(max_abs(p.dense_target() - MatrixXd::Identity(5, 5)), 1e-15);
}

TEST(Instance, TwoMessageNoCache) {
  const auto p = build_completion_problem(build_instance(2, {1, 1}, {{{0}, {}}, {{1}, {}}}));
  EXPECT_EQ(p.num_observed(), 4u);
  EXPECT_LT(max_abs(p.dense_target() - MatrixXd::Identity(2, 2)), 1e-15);
}

TEST(Instance, GroupcastThreeByTwo) {
  const auto inst = build_instance(2, {1, 1}, {{{0, 1}, {}}, {{1}, {0}}});
  const auto p = build_completion_problem(inst);
  ASSERT_EQ(p.rows(), 3);
  ASSERT_EQ(p.cols(), 2);
  const std::set<std::pair<int, int>> expected = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 1}};
  EXPECT_EQ(omega_of(p), expected);
  MatrixXd J(3, 2);
  J << 1, 0, 0, 1, 0, 1;
  EXPECT_LT(max_abs(p.dense_target() - J), 1e-15);
  ASSERT_EQ(p.row_blocks().size(), 3u);
  EXPECT_EQ(p.row_blocks()[1].destination, 0);
  EXPECT_EQ(p.row_blocks()[1].message, 1);
  EXPECT_EQ(p.row_blocks()[2].destination, 1);
}

TEST(Instance, MultiStreamBlocks) {
  const auto inst = build_instance(2, {2, 3}, {{{0}, {}}, {{1}, {0}}});
  const auto p = build_completion_problem(inst);
  EXPECT_EQ(p.rows(), 5);
  EXPECT_EQ(p.cols(), 5);
  // Size law: sum over block rows of Q_i times the non-cached column width.
  EXPECT_EQ(p.num_observed(), static_cast<std::size_t>(2 * 5 + 3 * 3));
  // Ones: one identity block per desired message per destination.
  EXPECT_NEAR(p.dense_target().sum(), 5.0, 1e-15);
  EXPECT_EQ(p.col_blocks()[1].begin, 2);
  EXPECT_EQ(p.col_blocks()[1].end, 5);
}

TEST(Instance, RandomUnicastProperties) {
  for (int m : {0, 5, 19}) {
    const auto inst = random_unicast_instance(20, m, 3, 11);
    for (int k = 0; k < 20; ++k) {
      const auto& d = inst.destinations()[k];
      EXPECT_EQ(d.desired, std::vector<int>{k});
      EXPECT_EQ(static_cast<int>(d.cached.size()), m);
      EXPECT_FALSE(inst.is_cached(k, k));
    }
    const auto p = build_completion_problem(inst);
    EXPECT_EQ(p.num_observed(), static_cast<std::size_t>(60 * 3 * (20 - m)));
  }
  EXPECT_EQ(random_unicast_instance(20, 7, 3, 5), random_unicast_instance(20, 7, 3, 5));
  EXPECT_FALSE(random_unicast_instance(20, 7, 3, 5) == random_unicast_instance(20, 7, 3, 6));
  EXPECT_THROW(random_unicast_instance(20, 20, 3, 1), RangeError);
  EXPECT_THROW(random_unicast_instance(20, -1, 3, 1), RangeError);
}

TEST(Instance, UnicastRowsHaveKMinusMEntries) {
  const auto p = build_completion_problem(random_unicast_instance(9, 4, 1, 2));
  for (int r = 0; r < p.rows(); ++r)
    EXPECT_EQ(p.pattern().row_ptr[r + 1] - p.pattern().row_ptr[r], 5);
}

TEST(Instance, PatternIndexesAreConsistent) {
  const auto p = build_completion_problem(random_unicast_instance(7, 3, 2, 9));
  const auto& pat = p.pattern();
  for (std::size_t e = 1; e < pat.size(); ++e)
    EXPECT_TRUE(std::make_pair(pat.row[e - 1], pat.col[e - 1]) < std::make_pair(pat.row[e], pat.col[e]));
  for (int c = 0; c < pat.cols; ++c)
    for (int q = pat.col_ptr[c]; q < pat.col_ptr[c + 1]; ++q) EXPECT_EQ(pat.col[pat.col_order[q]], c);
}

TEST(Instance, ParseFig2) {
  EXPECT_EQ(read_instance(kFig2Text), fig2_instance());
}

TEST(Instance, RoundTripIsCanonical) {
  const auto text = write_instance(fig2_instance());
  EXPECT_EQ(read_instance(text), fig2_instance());
  EXPECT_EQ(write_instance(read_instance(text)), text);
  EXPECT_EQ(text, kFig2Text);
  const auto inst = random_unicast_instance(12, 4, 2, 3);
  EXPECT_EQ(read_instance(write_instance(inst)), inst);
  // Non-canonical input (unsorted, duplicated, compact) normalizes on write.
  const auto messy = read_instance(
      R"({"K":2,"streams":[1,1],"destinations":[{"cached":[],"desired":[2,1,2]}]})");
  EXPECT_EQ(write_instance(messy), write_instance(build_instance(2, {1, 1}, {{{0, 1}, {}}})));
}

TEST(Instance, ParseErrorsCarryContext) {
  EXPECT_THROW(read_instance(""), ParseError);
  EXPECT_THROW(read_instance("[]"), ParseError);
  try {
    read_instance("{\n  \"K\": 2,\n  \"streams\": [1, 1,\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 3);
  }
  try {
    read_instance(R"({"K":2,"streams":[1,1],"destinations":[{"desired":[1],"cached":[3]}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("destination 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_instance(R"({"K":2,"streams":[1,1],"destinations":[],"extra":1})"), ParseError);
  EXPECT_THROW(read_instance(R"({"K":"two","streams":[1,1],"destinations":[]})"), ParseError);
  EXPECT_THROW(read_instance(R"({"K":2,"streams":[1,1],"destinations":[{"desired":[1],"cached":[1]}]})"),
               ParseError);
}

TEST(Instance, BuildIsPure) {
  const auto inst = random_unicast_instance(8, 3, 2, 4);
  const auto a = build_completion_problem(inst);
  const auto b = build_completion_problem(inst);
  EXPECT_EQ(a.pattern().row, b.pattern().row);
  EXPECT_EQ(a.pattern().col, b.pattern().col);
  EXPECT_EQ(a.target(), b.target());
}
