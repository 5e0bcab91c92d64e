#pragma once

#include <cstdint>
#include <string_view>

#include "lrmc/instance.hpp"
#include "lrmc/objective.hpp"
#include "lrmc/point.hpp"

namespace lrmc {

/// A point together with the rank-collapse signal raised while producing it.
/// On collapse the trailing singular values are floored so that S stays
/// nonsingular; callers decide what to do with a collapsed point.
struct FactorResult {
  FactoredPoint point;
  bool rank_collapse = false;
};

/// U, V from QR of seeded Gaussian matrices; S diagonal with entries in [0.5, 2).
/// Throws RangeError unless 1 <= rank <= min(rows, cols).
FactoredPoint random_point(int rows, int cols, int rank, std::uint64_t seed);

/// Gaussian tangent vector at x (Up, Vp projected to the complements).
TangentVector random_tangent(const FactoredPoint& x, std::uint64_t seed);

double orthonormality_error(const MatrixXd& Q);
/// max(||U^T Up||_F, ||V^T Vp||_F).
double tangent_error(const FactoredPoint& x, const TangentVector& xi);

/// Re-orthonormalizes U and V by QR, folding the triangular factors into S.
/// Leaves x unchanged when both drifts are below `tol`.
void reorthonormalize(FactoredPoint& x, double tol = 1e-8);

/// Frobenius-orthogonal projection onto T_x M_r:
///   G -> P_U G P_V + P_U^perp G P_V + P_U G P_V^perp.
TangentVector project_tangent(const FactoredPoint& x, const MatrixXd& G);
TangentVector project_tangent(const FactoredPoint& x, const MaskedResidual& G);
TangentVector project_tangent(const FactoredPoint& x, const LowRank& G);

enum class MetricMode { frobenius, scaled };
/// "frobenius" or "scaled"; throws ModeError otherwise.
MetricMode parse_metric_mode(std::string_view name);

/// The (xi_U, xi_Sigma, xi_V) perturbation of the three factors matching an
/// embedded tangent vector, with xi_U = Up S^-1, xi_Sigma = M, xi_V = Vp S^-T.
struct FactorComponents {
  MatrixXd dU;
  MatrixXd dS;
  MatrixXd dV;
};
FactorComponents to_factor_components(const FactoredPoint& x, const TangentVector& xi);

/// frobenius: <xi, zeta>_F of the ambient matrices (what the solvers use).
/// scaled: <dU, dU' S S^T> + <dS, dS'> + <dV, dV' S^T S> on factor components.
double metric_inner(const FactoredPoint& x, const TangentVector& xi, const TangentVector& zeta,
                    MetricMode mode = MetricMode::frobenius);
double metric_norm(const TangentVector& xi);

TangentVector riem_grad(const CompletionProblem& problem, const FactoredPoint& x);

enum class HessianMode { fd, exact };
/// "fd" or "exact"; throws ModeError otherwise.
HessianMode parse_hessian_mode(std::string_view name);

/// Riemannian Hessian of f at a fixed point, caching what every product
/// shares (Euclidean and Riemannian gradient, S^-1).
///
/// exact: P_x(P_Omega(xi)) plus the curvature terms
///   Up += P_U^perp G Vp S^-1,   Vp += P_V^perp G^T Up S^-T.
/// fd: central difference of the gradient field along the retraction curve,
///   step t = 1e-5 / ||xi||, transported back by projection at x.
class HessianOperator {
 public:
  /// Throws SingularSigma in exact mode when cond(S) > 1e12.
  HessianOperator(const CompletionProblem& problem, const FactoredPoint& x, HessianMode mode);

  TangentVector apply(const TangentVector& xi) const;

  const MaskedResidual& euclidean_gradient() const noexcept { return egrad_; }
  const TangentVector& gradient() const noexcept { return grad_; }
  const FactoredPoint& point() const noexcept { return x_; }
  HessianMode mode() const noexcept { return mode_; }

 private:
  TangentVector apply_exact(const TangentVector& xi) const;
  TangentVector apply_fd(const TangentVector& xi) const;

  const CompletionProblem& problem_;
  FactoredPoint x_;
  HessianMode mode_;
  MaskedResidual egrad_;
  TangentVector grad_;
  MatrixXd s_inv_;
};

TangentVector hess_apply(const CompletionProblem& problem, const FactoredPoint& x,
                         const TangentVector& xi, HessianMode mode);

/// Best rank-`rank` approximation of A B^T through QR of both factors and an
/// SVD of the small core. Collapse is signalled when singular value `rank`
/// falls below 1e-14 * max(1, sigma_1).
FactorResult truncate(const LowRank& m, int rank, std::uint64_t pad_seed = 0);

/// Metric-projection retraction: truncated SVD of X + xi.
/// Throws RangeError if target_rank < rank(x) or exceeds min(M, Q).
FactorResult retract(const FactoredPoint& x, const TangentVector& xi, int target_rank);
FactorResult retract(const FactoredPoint& x, const TangentVector& xi);

/// Rank-r truncated SVD of the zero-filled J. When rank(J) < r the missing
/// directions are seeded random orthonormal vectors with S entries 1e-8 and
/// rank_collapse is set.
FactorResult spectral_init(const CompletionProblem& problem, int rank, std::uint64_t seed = 0);

/// Retraction of x along a seeded random tangent direction of norm
/// `relative * ||S||_F`. Breaks the coordinate symmetry of spectral starts on
/// identity-like targets, whose zero gradient would otherwise pin the solvers.
FactoredPoint perturb(const FactoredPoint& x, double relative, std::uint64_t seed);

}  // namespace lrmc
