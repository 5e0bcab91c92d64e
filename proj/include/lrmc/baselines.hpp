#pragma once

#include <cstdint>

#include "lrmc/rtr.hpp"

namespace lrmc {

/// Stopping rules shared by the two comparison solvers.
struct BaselineOptions {
  int max_outer = 500;
  double cost_tol = 1e-7;
  double grad_tol = 1e-9;
  /// Relative stationarity: ||grad|| <= grad_tol_rel * sqrt(2 f). 0 = off.
  double grad_tol_rel = 0.0;
  /// Stall: relative cost decrease below stall_rel over stall_window iterations.
  int stall_window = 10;
  double stall_rel = 1e-12;
  std::uint64_t seed = 1;
  double time_limit = 0.0;
};

/// Alternating minimization on X = Ufac * Vfac with a dense working matrix:
///   Z <- Ufac Vfac with Omega entries reset to J,
///   Ufac <- Z Vfac^T (Vfac Vfac^T)^+,   Vfac <- (Ufac^T Ufac)^+ Ufac^T Z.
/// Dead directions of a singular Gram matrix are re-seeded.
FixedRankResult solve_fixed_rank_altmin(const CompletionProblem& problem,
                                        const FactoredPoint& init, const BaselineOptions& opts);

/// Riemannian conjugate gradient on the embedded fixed-rank manifold:
/// Polak-Ribiere+ coefficient with Powell restarts, transport by projection,
/// exact quadratic step along the tangent direction followed by retraction
/// (halved until the cost does not increase).
FixedRankResult solve_fixed_rank_embcg(const CompletionProblem& problem,
                                       const FactoredPoint& init, const BaselineOptions& opts);

}  // namespace lrmc
