#include "lrmc/kernels.hpp"

#include <atomic>

#ifdef LRMC_HAVE_OPENMP
#include <omp.h>
#endif

namespace lrmc::kernels {

namespace {

std::atomic<Policy> g_policy{Policy::automatic};

// Below this many multiply-adds the fork/join overhead dominates.
constexpr double kParallelWork = 2.0e5;

bool use_parallel(std::size_t entries, Eigen::Index width) {
  switch (g_policy.load(std::memory_order_relaxed)) {
    case Policy::serial:
      return false;
    case Policy::parallel:
      return true;
    case Policy::automatic:
      break;
  }
#ifdef LRMC_HAVE_OPENMP
  if (omp_in_parallel() || omp_get_max_threads() < 2) return false;
  return static_cast<double>(entries) * static_cast<double>(width) >= kParallelWork;
#else
  (void)entries;
  (void)width;
  return false;
#endif
}

}  // namespace

void set_policy(Policy policy) { g_policy.store(policy, std::memory_order_relaxed); }
Policy policy() { return g_policy.load(std::memory_order_relaxed); }

int max_threads() {
#ifdef LRMC_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void sample_product(const ObservationPattern& p, const MatrixXd& A, const MatrixXd& B,
                    VectorXd& out) {
  if (use_parallel(p.size(), A.cols()))
    omp::sample_product(p, A, B, out);
  else
    serial::sample_product(p, A, B, out);
}

void sparse_times(const ObservationPattern& p, const VectorXd& values, const MatrixXd& B,
                  MatrixXd& out) {
  if (use_parallel(p.size(), B.cols()))
    omp::sparse_times(p, values, B, out);
  else
    serial::sparse_times(p, values, B, out);
}

void sparse_transpose_times(const ObservationPattern& p, const VectorXd& values,
                            const MatrixXd& A, MatrixXd& out) {
  if (use_parallel(p.size(), A.cols()))
    omp::sparse_transpose_times(p, values, A, out);
  else
    serial::sparse_transpose_times(p, values, A, out);
}

}  // namespace lrmc::kernels
