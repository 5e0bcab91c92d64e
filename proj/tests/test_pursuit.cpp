#include <gtest/gtest.h>

#include <random>

#include "lrmc/errors.hpp"
#include "lrmc/rank_pursuit.hpp"
#include "test_util.hpp"

using namespace lrmc;
using namespace lrmc::testing;

namespace {

CachingInstance unicast(int K, bool full_cache) {
  std::vector<Destination> d;
  for (int k = 0; k < K; ++k) {
    std::vector<int> cached;
    if (full_cache)
      for (int j = 0; j < K; ++j)
        if (j != k) cached.push_back(j);
    d.push_back({{k}, cached});
  }
  return build_instance(K, std::vector<int>(K, 1), d);
}

FactoredPoint e1e1(double s) {
  return {Eigen::Vector2d(1, 0), MatrixXd::Constant(1, 1, s), Eigen::Vector2d(1, 0)};
}

}  // namespace

TEST(LineSearch, ClosedFormScalar) {
  const CompletionProblem p(1, 1, {{0, 0, 1.0}});
  FactoredPoint x{MatrixXd::Ones(1, 1), MatrixXd::Constant(1, 1, 1e-300), MatrixXd::Ones(1, 1)};
  EXPECT_NEAR(exact_line_step(p, x, LowRank{MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)}), 1.0, 1e-15);
}

TEST(LineSearch, IsExactMinimizer) {
  const auto p = build_completion_problem(random_unicast_instance(6, 2, 2, 7));
  const auto x = random_point(p.rows(), p.cols(), 2, 1);
  const auto xi = random_tangent(x, 2);
  const double alpha = exact_line_step(p, x, xi);
  const MatrixXd X = x.ambient(), D = ambient(x, xi);
  const double best = dense_cost(p, X + alpha * D);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) EXPECT_LE(best, dense_cost(p, X + t(rng) * D) + 1e-12);
}

TEST(LineSearch, DirectionOffOmega) {
  const CompletionProblem p(2, 2, {{0, 0, 1.0}});
  const auto x = e1e1(0.5);
  EXPECT_THROW(exact_line_step(p, x, LowRank{Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1)}),
               ZeroDirection);
}

TEST(RankIncrease, HandComputedIdentityCompletion) {
  const CompletionProblem p(2, 2, {{0, 0, 1.0}, {0, 1, 0.0}, {1, 0, 0.0}, {1, 1, 1.0}});
  const auto inc = rank_increase_step(p, e1e1(1.0));
  EXPECT_EQ(inc.status, RankIncreaseStatus::ok);
  EXPECT_NEAR(inc.alpha, 1.0, 1e-14);
  EXPECT_LT(max_abs(inc.point.ambient() - MatrixXd::Identity(2, 2)), 1e-14);
  EXPECT_LT(inc.cost, 1e-28);
  EXPECT_EQ(inc.point.rank(), 2);
}

TEST(RankIncrease, TangentResidualSignalsStagnation) {
  // Omega = {(0,0)}, J = 1 and X = (1 + 1e-10) e1 e1^T: G lies in the tangent
  // space, its normal part is zero and its norm is below grad_tol.
  const CompletionProblem p(2, 2, {{0, 0, 1.0}});
  const auto x = e1e1(1.0 + 1e-10);
  const auto inc = rank_increase_step(p, x, 1e-9);
  EXPECT_EQ(inc.status, RankIncreaseStatus::stagnation);
  EXPECT_LT(max_abs(inc.point.ambient() - x.ambient()), 1e-300 + 0.0);
  EXPECT_THROW(rank_increase_step(p, random_point(2, 2, 2, 1)), RangeError);
}

TEST(RankIncrease, NeverIncreasesCostAndKeepsExactRank) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int K = 3 + static_cast<int>(rng() % 8);
    const int m = static_cast<int>(rng() % K);
    const int Q0 = 1 + static_cast<int>(rng() % 2);
    const auto p = build_completion_problem(random_unicast_instance(K, m, Q0, rng()));
    const int r = 1 + static_cast<int>(rng() % std::min(4, p.rows() - 1));
    const auto x = random_point(p.rows(), p.cols(), r, rng());
    const auto inc = rank_increase_step(p, x);
    EXPECT_LE(inc.cost, cost(p, x) + 1e-12);
    EXPECT_NEAR(inc.cost, cost(p, inc.point), 1e-12 * std::max(1.0, inc.cost));
    if (inc.status == RankIncreaseStatus::ok) {
      Eigen::JacobiSVD<MatrixXd> svd(inc.point.S);
      const auto& sv = svd.singularValues();
      EXPECT_EQ(inc.point.rank(), r + 1);
      EXPECT_GT(sv[r], 1e-12 * sv[0]);
    }
  }
}

TEST(Pursuit, Fig2NeedsTwoChannelUses) {
  const auto p = build_completion_problem(fig2_instance());
  for (auto inner : {InnerSolver::rtr, InnerSolver::altmin, InnerSolver::embcg}) {
    PursuitOptions o;
    o.inner = inner;
    const auto res = solve_min_rank(p, o);
    EXPECT_TRUE(res.report.converged) << to_string(inner);
    EXPECT_EQ(res.report.achieved_rank, 2) << to_string(inner);
    EXPECT_LE(res.report.final_cost, 1e-7);
    EXPECT_EQ(res.point.rank(), 2);
  }
  // Rank one is infeasible.
  PursuitOptions o;
  o.max_rank = 1;
  const auto res = solve_min_rank(p, o);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.status, PursuitStatus::max_rank);
  EXPECT_GT(res.report.final_cost, 1e-3);
}

TEST(Pursuit, TrivialUnicastExtremes) {
  EXPECT_EQ(solve_min_rank(build_completion_problem(unicast(3, false)), {}).report.achieved_rank, 3);
  EXPECT_EQ(solve_min_rank(build_completion_problem(unicast(5, true)), {}).report.achieved_rank, 1);
}

TEST(Pursuit, ReportInvariants) {
  const auto p = build_completion_problem(random_unicast_instance(8, 4, 2, 3));
  const auto res = solve_min_rank(p, {});
  const auto& rep = res.report;
  ASSERT_TRUE(rep.converged);
  EXPECT_LE(rep.final_cost, 1e-7);
  ASSERT_EQ(static_cast<int>(rep.stages.size()), rep.achieved_rank);
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto& s = rep.stages[i];
    EXPECT_EQ(s.rank, static_cast<int>(i) + 1);
    EXPECT_LE(s.final_cost, s.init_cost * (1 + 1e-12));
    if (i > 0) {
      EXPECT_LT(s.final_cost, rep.stages[i - 1].final_cost);
      // The rank transition itself never increases the cost.
      EXPECT_LE(s.init_cost, rep.stages[i - 1].final_cost + 1e-12);
    }
  }
  EXPECT_EQ(rep.stages.front().entry, StageEntry::spectral_init);
}

TEST(Pursuit, OptionsAreValidated) {
  const auto p = build_completion_problem(fig2_instance());
  PursuitOptions o;
  o.epsilon = 0.0;
  EXPECT_THROW(solve_min_rank(p, o), RangeError);
  o = {};
  o.max_rank = 6;
  EXPECT_THROW(solve_min_rank(p, o), RangeError);
  o = {};
  o.escape_lanczos_steps = 0;
  EXPECT_THROW(solve_min_rank(p, o), RangeError);
  EXPECT_EQ(parse_inner_solver("embcg"), InnerSolver::embcg);
  EXPECT_THROW(parse_inner_solver("lmafit"), ModeError);
}

TEST(Pursuit, DeterministicGivenSeed) {
  const auto p = build_completion_problem(random_unicast_instance(10, 5, 2, 1));
  PursuitOptions o;
  o.seed = 42;
  const auto a = solve_min_rank(p, o), b = solve_min_rank(p, o);
  EXPECT_EQ(a.report.achieved_rank, b.report.achieved_rank);
  EXPECT_EQ(a.report.final_cost, b.report.final_cost);
  EXPECT_EQ(a.point.ambient(), b.point.ambient());
}
