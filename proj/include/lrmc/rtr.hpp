#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrmc/manifold.hpp"

namespace lrmc {

/// Trust-region constants. Zero-valued `delta_bar`, `delta0` and `max_inner`
/// mean "derive from the problem" (||J||_F, delta_bar / 8 and the tangent
/// space dimension r (M + Q - r)); see resolved().
struct TrustRegionOptions {
  double delta_bar = 0.0;
  double delta0 = 0.0;
  double rho_accept = 0.1;
  int max_outer = 500;
  double grad_tol = 1e-9;
  /// Also stop once ||grad|| <= grad_tol_rel * sqrt(2 f), i.e. the gradient is
  /// small next to the residual norm. 0 disables the test.
  double grad_tol_rel = 0.0;
  double cost_tol = 1e-7;
  double tcg_kappa = 0.1;
  double tcg_theta = 1.0;
  int max_inner = 0;
  int max_rejections = 30;
  /// Stall: relative cost decrease below stall_rel over stall_window
  /// iterations; a window of 0 disables the test.
  int stall_window = 0;
  double stall_rel = 1e-12;
  HessianMode hessian = HessianMode::exact;
  /// At a point with ||grad|| <= grad_tol but cost above cost_tol, look for a
  /// direction of negative curvature (Lanczos, `lanczos_steps` products) and
  /// step along it; at most `max_escapes` times per solve. 0 disables it.
  int max_escapes = 20;
  int lanczos_steps = 40;
  /// Wall-clock cap in seconds; 0 disables it.
  double time_limit = 0.0;

  /// Throws RangeError when an invariant is violated after resolution.
  void validate() const;
  TrustRegionOptions resolved(const CompletionProblem& problem, int rank) const;
};

enum class TcgStop { negative_curvature, boundary, kappa_residual, theta_residual, max_inner };
std::string_view to_string(TcgStop s);

enum class StopReason { cost_tol, grad_tol, relative_grad, max_outer, stagnation, stall, time_limit };
std::string_view to_string(StopReason s);

struct TraceRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double delta = 0.0;  // 0 for solvers without a radius
  bool accepted = true;
  std::optional<TcgStop> tcg_stop;
  int inner_iters = 0;
  double elapsed_ms = 0.0;
};

struct SolverTrace {
  std::string algorithm;
  std::vector<TraceRecord> records;
};

/// Common result of every fixed-rank solver.
struct FixedRankResult {
  FactoredPoint point;
  double cost = 0.0;
  SolverTrace trace;
  StopReason reason = StopReason::max_outer;
};

struct TcgResult {
  TangentVector step;
  TangentVector hess_step;  // Hess[step], accumulated alongside the iterates
  TcgStop stop = TcgStop::kappa_residual;
  int iterations = 0;
  /// m(0) - m(step) = -<grad, step> - 1/2 <step, Hess[step]>.
  double model_decrease = 0.0;
};

/// Steihaug-Toint truncated CG on the model
///   m(xi) = f + <grad, xi> + 1/2 <xi, Hess[xi]>,  ||xi|| <= delta.
/// `grad` must be the Riemannian gradient at hess.point().
TcgResult tcg(const HessianOperator& hess, const TangentVector& grad, double delta,
              const TrustRegionOptions& opts);

TcgResult tcg(const CompletionProblem& problem, const FactoredPoint& x,
              const TangentVector& grad, double delta, const TrustRegionOptions& opts);

/// Hessian in the requested mode, or fd when exact mode raises SingularSigma.
std::unique_ptr<HessianOperator> make_hessian(const CompletionProblem& problem,
                                              const FactoredPoint& x, HessianMode mode);

struct CurvatureEstimate {
  double lambda = 0.0;  // smallest Ritz value
  TangentVector direction;  // unit Ritz vector
};

/// Smallest eigenpair estimate of the Riemannian Hessian by Lanczos with full
/// reorthogonalization, started from a seeded random tangent vector.
CurvatureEstimate min_curvature(const HessianOperator& hess, int steps, std::uint64_t seed);

/// Step of length at most `tau` along the most negative curvature direction of
/// hess (signed to be a non-ascent direction), shrunk by 4 until the cost
/// decreases. Empty when no curvature below -1e-10 is found or no trial step
/// decreases the cost.
std::optional<FactoredPoint> negative_curvature_step(const CompletionProblem& problem,
                                                     const HessianOperator& hess, double tau,
                                                     int lanczos_steps, std::uint64_t seed);

/// Riemannian trust-region at the fixed rank of `init`.
FixedRankResult solve_fixed_rank_rtr(const CompletionProblem& problem, const FactoredPoint& init,
                                     const TrustRegionOptions& opts);

}  // namespace lrmc
