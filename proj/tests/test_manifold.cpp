#include <gtest/gtest.h>

#include <random>

#include "lrmc/errors.hpp"
#include "lrmc/manifold.hpp"
#include "test_util.hpp"

using namespace lrmc;
using namespace lrmc::testing;

namespace {

CompletionProblem sample_problem(std::uint64_t seed = 4) {
  return build_completion_problem(random_unicast_instance(6, 2, 2, seed));
}

MatrixXd ambient_tangent(const FactoredPoint& x, const TangentVector& xi) {
  return x.U * xi.M * x.V.transpose() + xi.Up * x.V.transpose() + x.U * xi.Vp.transpose();
}

MatrixXd gaussian(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Dense oracle of the tangent projection: P_U G + G P_V - P_U G P_V.
MatrixXd dense_projection(const FactoredPoint& x, const MatrixXd& G) {
  const MatrixXd PU = x.U * x.U.transpose();
  const MatrixXd PV = x.V * x.V.transpose();
  return PU * G + G * PV - PU * G * PV;
}

}  // namespace

TEST(Manifold, RandomPointIsOrthonormal) {
  const auto x = random_point(12, 9, 3, 1);
  EXPECT_LT(orthonormality_error(x.U), 1e-12);
  EXPECT_LT(orthonormality_error(x.V), 1e-12);
  EXPECT_THROW(random_point(4, 3, 4, 1), RangeError);
  EXPECT_THROW(random_point(4, 3, 0, 1), RangeError);
}

TEST(Manifold, ProjectionMatchesDenseOracleAndIsIdempotent) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_point(12, 10, 3, trial);
    const MatrixXd G = gaussian(12, 10, 100 + trial);
    const auto xi = project_tangent(x, G);
    EXPECT_LT(max_abs(ambient_tangent(x, xi) - dense_projection(x, G)), 1e-12);
    EXPECT_LT(tangent_error(x, xi), 1e-12);
    const auto twice = project_tangent(x, ambient_tangent(x, xi));
    EXPECT_LT(max_abs(ambient_tangent(x, twice) - ambient_tangent(x, xi)), 1e-10);
    // G - P(G) is Frobenius-orthogonal to the tangent space.
    const auto zeta = random_tangent(x, 200 + trial);
    const double ip = ((G - ambient_tangent(x, xi)).array() * ambient_tangent(x, zeta).array()).sum();
    EXPECT_LT(std::abs(ip), 1e-10 * G.norm() * metric_norm(zeta));
  }
}

TEST(Manifold, LowRankAndMaskedProjectionsAgreeWithDense) {
  const auto p = sample_problem();
  const auto x = random_point(p.rows(), p.cols(), 2, 3);
  const auto g = euclid_grad(p, x);
  const auto a = project_tangent(x, g);
  const auto b = project_tangent(x, g.dense());
  EXPECT_LT(metric_norm(a - b), 1e-12);
  const LowRank lr{gaussian(p.rows(), 3, 5), gaussian(p.cols(), 3, 6)};
  EXPECT_LT(metric_norm(project_tangent(x, lr) - project_tangent(x, lr.dense())), 1e-12);
}

TEST(Manifold, FrobeniusMetricIsAmbientInnerProduct) {
  const auto x = random_point(9, 8, 3, 2);
  const auto xi = random_tangent(x, 3);
  const auto zeta = random_tangent(x, 4);
  const double ambient = (ambient_tangent(x, xi).array() * ambient_tangent(x, zeta).array()).sum();
  EXPECT_LT(rel_err(metric_inner(x, xi, zeta), ambient), 1e-12);
}

TEST(Manifold, ScaledMetricOnFactorComponents) {
  const auto x = random_point(9, 8, 3, 2);
  const auto xi = random_tangent(x, 3);
  const auto c = to_factor_components(x, xi);
  EXPECT_LT(max_abs(c.dU * x.S - xi.Up), 1e-12);
  EXPECT_LT(max_abs(x.S * c.dV.transpose() - xi.Vp.transpose()), 1e-12);
  // Positive definite and symmetric.
  const auto zeta = random_tangent(x, 5);
  EXPECT_GT(metric_inner(x, xi, xi, MetricMode::scaled), 0.0);
  EXPECT_LT(rel_err(metric_inner(x, xi, zeta, MetricMode::scaled),
                    metric_inner(x, zeta, xi, MetricMode::scaled)),
            1e-12);
  EXPECT_EQ(parse_metric_mode("scaled"), MetricMode::scaled);
  EXPECT_THROW(parse_metric_mode("euclid"), ModeError);
}

TEST(Manifold, GradientDefiningProperty) {
  const auto p = sample_problem();
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_point(p.rows(), p.cols(), 2, trial);
    const auto g = riem_grad(p, x);
    const auto xi = random_tangent(x, 50 + trial);
    const MatrixXd egrad = p.dense_mask().cwiseProduct(x.ambient()) - p.dense_target();
    const double rhs = (egrad.array() * ambient_tangent(x, xi).array()).sum();
    EXPECT_LT(rel_err(metric_inner(x, g, xi), rhs), 1e-10);
    // Directional derivative of the dense cost along the straight line X + t xi.
    const double t = 1e-6;
    const MatrixXd X = x.ambient();
    const MatrixXd D = ambient_tangent(x, xi);
    const double fd = (dense_cost(p, X + t * D) - dense_cost(p, X - t * D)) / (2 * t);
    EXPECT_LT(rel_err(fd, rhs), 1e-6);
  }
}

TEST(Manifold, HessianQuadraticFormMatchesSecondDerivative) {
  // The metric-projection retraction is second order, so d^2/dt^2 f(R(t xi))
  // at 0 equals <xi, Hess xi>.
  const auto p = sample_problem();
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_point(p.rows(), p.cols(), 2, trial);
    auto xi = random_tangent(x, 300 + trial);
    xi *= 1.0 / metric_norm(xi);
    const double t = 1e-4;
    const double f0 = cost(p, x);
    const double fp = cost(p, retract(x, t * xi).point);
    const double fm = cost(p, retract(x, -t * xi).point);
    const double second = (fp - 2 * f0 + fm) / (t * t);
    for (const auto mode : {HessianMode::exact, HessianMode::fd}) {
      const double q = metric_inner(x, xi, hess_apply(p, x, xi, mode));
      EXPECT_NEAR(q, second, 1e-4 * std::max(1.0, std::abs(second))) << "mode " << int(mode);
    }
  }
}

TEST(Manifold, HessianSymmetryAndModeAgreement) {
  const auto p = sample_problem();
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_point(p.rows(), p.cols(), 1 + trial % 3, 1000 + trial);
    const auto xi = random_tangent(x, 2000 + trial);
    const auto zeta = random_tangent(x, 3000 + trial);
    const HessianOperator exact(p, x, HessianMode::exact);
    const HessianOperator fd(p, x, HessianMode::fd);
    const auto hx = exact.apply(xi);
    const auto hz = exact.apply(zeta);
    const double scale = metric_norm(xi) * metric_norm(zeta) * std::max(1.0, metric_norm(hx));
    EXPECT_LT(std::abs(metric_inner(x, hx, zeta) - metric_inner(x, xi, hz)), 1e-6 * scale);
    const auto fx = fd.apply(xi);
    const auto fz = fd.apply(zeta);
    EXPECT_LT(std::abs(metric_inner(x, fx, zeta) - metric_inner(x, xi, fz)), 1e-6 * scale);
    EXPECT_LT(metric_norm(fx - hx), 1e-4 * metric_norm(hx));
  }
}

TEST(Manifold, ExactHessianRejectsSingularSigma) {
  const auto p = sample_problem();
  auto x = random_point(p.rows(), p.cols(), 2, 1);
  x.S(1, 1) = 1e-14;
  EXPECT_THROW(HessianOperator(p, x, HessianMode::exact), SingularSigma);
  EXPECT_NO_THROW(HessianOperator(p, x, HessianMode::fd));
}

TEST(Manifold, RetractionIsBestApproximation) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_point(10, 8, 3, trial);
    const auto xi = random_tangent(x, 40 + trial);
    const MatrixXd Y = x.ambient() + ambient_tangent(x, xi);
    Eigen::JacobiSVD<MatrixXd> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const MatrixXd oracle = svd.matrixU().leftCols(3) * svd.singularValues().head(3).asDiagonal() *
                            svd.matrixV().leftCols(3).transpose();
    const auto r = retract(x, xi);
    EXPECT_FALSE(r.rank_collapse);
    EXPECT_LT(max_abs(r.point.ambient() - oracle), 1e-12 * std::max(1.0, Y.norm()));
    EXPECT_LT(orthonormality_error(r.point.U), 1e-12);
    EXPECT_LT(orthonormality_error(r.point.V), 1e-12);
  }
}

TEST(Manifold, RetractToLargerRankAndCollapse) {
  const auto x = random_point(7, 6, 2, 1);
  const auto up = retract(x, TangentVector::zero(x), 3);
  EXPECT_EQ(up.point.rank(), 3);
  EXPECT_TRUE(up.rank_collapse);  // X has rank 2, the third value is floored
  EXPECT_LT(max_abs(up.point.ambient() - x.ambient()), 1e-12);
  EXPECT_THROW(retract(x, TangentVector::zero(x), 1), RangeError);
}

TEST(Manifold, ZeroTangentRetractsToSamePoint) {
  const auto x = random_point(7, 6, 2, 9);
  EXPECT_LT(max_abs(retract(x, TangentVector::zero(x)).point.ambient() - x.ambient()), 1e-13);
}

TEST(Manifold, ReorthonormalizePreservesMatrix) {
  auto x = random_point(8, 7, 3, 2);
  const MatrixXd X = x.ambient();
  x.U.col(0) *= 1.0 + 1e-6;
  x.S.row(0) /= 1.0 + 1e-6;
  reorthonormalize(x);
  EXPECT_LT(orthonormality_error(x.U), 1e-12);
  EXPECT_LT(max_abs(x.ambient() - X), 1e-12);
}

TEST(Manifold, SpectralInitOnFig2) {
  const auto p = build_completion_problem(fig2_instance());
  const auto s = spectral_init(p, 1, 0);
  Eigen::JacobiSVD<MatrixXd> svd(p.dense_target(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  EXPECT_NEAR(s.point.S(0, 0), svd.singularValues()[0], 1e-12);
  EXPECT_FALSE(s.rank_collapse);
  // J = I_5 has rank 5: asking for more than it supports is not possible here,
  // but a rank-deficient target pads and flags collapse.
  const CompletionProblem tiny(3, 3, {{0, 0, 1.0}});
  const auto t = spectral_init(tiny, 2, 1);
  EXPECT_TRUE(t.rank_collapse);
  EXPECT_EQ(t.point.rank(), 2);
  EXPECT_LT(orthonormality_error(t.point.U), 1e-12);
}

TEST(Manifold, PerturbKeepsRankAndMovesSlightly) {
  const auto x = random_point(8, 8, 2, 1);
  const auto y = perturb(x, 1e-2, 5);
  EXPECT_EQ(y.rank(), 2);
  const double d = (y.ambient() - x.ambient()).norm();
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 2e-2 * x.S.norm());
  EXPECT_LT(max_abs(perturb(x, 0.0, 5).ambient() - x.ambient()), 0.0 + 1e-300);
}
