#pragma once

#include <memory>

#include "lrmc/instance.hpp"
#include "lrmc/point.hpp"

namespace lrmc {

/// Sparse matrix supported on Omega, values aligned with the pattern's
/// (row, col) entry order. Entries off Omega are zero by construction.
struct MaskedResidual {
  std::shared_ptr<const ObservationPattern> pattern;
  VectorXd values;

  double squared_norm() const { return values.squaredNorm(); }
  double norm() const { return values.norm(); }

  /// S * B (M x k).
  MatrixXd times(const MatrixXd& B) const;
  /// S^T * A (Q x k).
  MatrixXd transpose_times(const MatrixXd& A) const;
  /// <S, A B^T>_F in O(|Omega| k).
  double inner(const LowRank& m) const;

  MatrixXd dense() const;
};

/// Entries of A B^T on Omega, pattern order.
VectorXd sample(const CompletionProblem& problem, const LowRank& m);

/// f(X) = 1/2 || P_Omega(X) - J ||_F^2, evaluated on Omega only.
double cost(const CompletionProblem& problem, const FactoredPoint& x);

/// Euclidean gradient P_Omega(X) - J.
MaskedResidual euclid_grad(const CompletionProblem& problem, const FactoredPoint& x);

/// P_Omega applied to the ambient form of a tangent vector at x.
MaskedResidual mask_tangent(const CompletionProblem& problem, const FactoredPoint& x,
                            const TangentVector& xi);

/// P_Omega(A B^T).
MaskedResidual mask_low_rank(const CompletionProblem& problem, const LowRank& m);

void check_dimensions(const CompletionProblem& problem, const FactoredPoint& x);

}  // namespace lrmc
