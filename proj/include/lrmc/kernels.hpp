#pragma once

#include <Eigen/Dense>

#include "lrmc/instance.hpp"

// Masked products over an observation pattern. These are the only loops in
// the solvers whose cost scales with |Omega|; every other operation works on
// r x r or (M+Q) x r factors.
//
// serial:: is the reference implementation and is what the tests compare
// against. omp:: parallelizes over entries, rows or columns. The unqualified
// entry points pick omp:: when the work is large enough and we are not
// already inside a parallel region.
namespace lrmc::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace serial {
/// out[e] = <A.row(row[e]), B.row(col[e])>, i.e. (A B^T) sampled on Omega.
void sample_product(const ObservationPattern& p, const MatrixXd& A, const MatrixXd& B,
                    VectorXd& out);
/// out = S * B, where S is the M x Q sparse matrix with `values` on Omega.
void sparse_times(const ObservationPattern& p, const VectorXd& values, const MatrixXd& B,
                  MatrixXd& out);
/// out = S^T * A.
void sparse_transpose_times(const ObservationPattern& p, const VectorXd& values,
                            const MatrixXd& A, MatrixXd& out);
}  // namespace serial

namespace omp {
void sample_product(const ObservationPattern& p, const MatrixXd& A, const MatrixXd& B,
                    VectorXd& out);
void sparse_times(const ObservationPattern& p, const VectorXd& values, const MatrixXd& B,
                  MatrixXd& out);
void sparse_transpose_times(const ObservationPattern& p, const VectorXd& values,
                            const MatrixXd& A, MatrixXd& out);
}  // namespace omp

enum class Policy { automatic, serial, parallel };

/// Process-wide dispatch policy (default automatic).
void set_policy(Policy policy);
Policy policy();

/// Threads the parallel variants may use; 1 without OpenMP.
int max_threads();

void sample_product(const ObservationPattern& p, const MatrixXd& A, const MatrixXd& B,
                    VectorXd& out);
void sparse_times(const ObservationPattern& p, const VectorXd& values, const MatrixXd& B,
                  MatrixXd& out);
void sparse_transpose_times(const ObservationPattern& p, const VectorXd& values,
                            const MatrixXd& A, MatrixXd& out);

}  // namespace lrmc::kernels
