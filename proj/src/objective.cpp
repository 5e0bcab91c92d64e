#include "lrmc/objective.hpp"

#include "lrmc/errors.hpp"
#include "lrmc/kernels.hpp"

namespace lrmc {

MatrixXd MaskedResidual::times(const MatrixXd& B) const {
  MatrixXd out;
  kernels::sparse_times(*pattern, values, B, out);
  return out;
}

MatrixXd MaskedResidual::transpose_times(const MatrixXd& A) const {
  MatrixXd out;
  kernels::sparse_transpose_times(*pattern, values, A, out);
  return out;
}

double MaskedResidual::inner(const LowRank& m) const {
  VectorXd s;
  kernels::sample_product(*pattern, m.A, m.B, s);
  return values.dot(s);
}

MatrixXd MaskedResidual::dense() const {
  MatrixXd out = MatrixXd::Zero(pattern->rows, pattern->cols);
  for (std::size_t e = 0; e < pattern->size(); ++e)
    out(pattern->row[e], pattern->col[e]) = values[static_cast<Eigen::Index>(e)];
  return out;
}

void check_dimensions(const CompletionProblem& problem, const FactoredPoint& x) {
  if (x.rows() != problem.rows() || x.cols() != problem.cols() || x.U.cols() != x.rank() ||
      x.V.cols() != x.rank() || x.S.cols() != x.rank())
    throw DimensionMismatch("point is " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + " rank " + std::to_string(x.rank()) +
                            ", problem is " + std::to_string(problem.rows()) + "x" +
                            std::to_string(problem.cols()));
}

VectorXd sample(const CompletionProblem& problem, const LowRank& m) {
  if (m.A.rows() != problem.rows() || m.B.rows() != problem.cols() || m.A.cols() != m.B.cols())
    throw DimensionMismatch("low-rank factors do not match the problem");
  VectorXd out;
  kernels::sample_product(problem.pattern(), m.A, m.B, out);
  return out;
}

double cost(const CompletionProblem& problem, const FactoredPoint& x) {
  check_dimensions(problem, x);
  return 0.5 * (sample(problem, as_low_rank(x)) - problem.target()).squaredNorm();
}

MaskedResidual euclid_grad(const CompletionProblem& problem, const FactoredPoint& x) {
  check_dimensions(problem, x);
  return {problem.pattern_ptr(), sample(problem, as_low_rank(x)) - problem.target()};
}

MaskedResidual mask_tangent(const CompletionProblem& problem, const FactoredPoint& x,
                            const TangentVector& xi) {
  check_dimensions(problem, x);
  if (xi.M.rows() != x.rank() || xi.Up.rows() != x.rows() || xi.Vp.rows() != x.cols())
    throw DimensionMismatch("tangent vector does not match its base point");
  return mask_low_rank(problem, as_low_rank(x, xi));
}

MaskedResidual mask_low_rank(const CompletionProblem& problem, const LowRank& m) {
  return {problem.pattern_ptr(), sample(problem, m)};
}

}  // namespace lrmc
