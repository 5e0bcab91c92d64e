#include "lrmc/kernels.hpp"

#ifdef LRMC_HAVE_OPENMP
#include <omp.h>
#endif

namespace lrmc::kernels::omp {

void sample_product(const ObservationPattern& p, const MatrixXd& A, const MatrixXd& B,
                    VectorXd& out) {
  const MatrixXd At = A.transpose();
  const MatrixXd Bt = B.transpose();
  out.resize(static_cast<Eigen::Index>(p.size()));
  const int n = static_cast<int>(p.size());
#pragma omp parallel for schedule(static)
  for (int e = 0; e < n; ++e) out[e] = At.col(p.row[e]).dot(Bt.col(p.col[e]));
}

void sparse_times(const ObservationPattern& p, const VectorXd& values, const MatrixXd& B,
                  MatrixXd& out) {
  const MatrixXd Bt = B.transpose();
  MatrixXd outT = MatrixXd::Zero(B.cols(), p.rows);
  // Each row is owned by one thread; no reduction needed.
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < p.rows; ++i)
    for (int e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e)
      outT.col(i) += values[e] * Bt.col(p.col[e]);
  out = outT.transpose();
}

void sparse_transpose_times(const ObservationPattern& p, const VectorXd& values,
                            const MatrixXd& A, MatrixXd& out) {
  const MatrixXd At = A.transpose();
  MatrixXd outT = MatrixXd::Zero(A.cols(), p.cols);
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < p.cols; ++j)
    for (int t = p.col_ptr[j]; t < p.col_ptr[j + 1]; ++t) {
      const int e = p.col_order[t];
      outT.col(j) += values[e] * At.col(p.row[e]);
    }
  out = outT.transpose();
}

}  // namespace lrmc::kernels::omp
