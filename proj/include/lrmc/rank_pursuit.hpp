#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrmc/baselines.hpp"
#include "lrmc/delivery.hpp"
#include "lrmc/line_search.hpp"
#include "lrmc/rtr.hpp"

namespace lrmc {

enum class InnerSolver { rtr, altmin, embcg };
/// "rtr", "altmin" or "embcg"; throws ModeError otherwise.
InnerSolver parse_inner_solver(std::string_view name);
std::string_view to_string(InnerSolver s);

struct PursuitOptions {
  /// Feasibility tolerance on the cost.
  double epsilon = 1e-7;
  /// 0 means min(M, Q).
  int max_rank = 0;
  InnerSolver inner = InnerSolver::rtr;
  /// Stage solves cap tCG at 30 steps: the full tangent dimension makes each
  /// outer step cost as much as a whole stage on mid-sized instances.
  TrustRegionOptions rtr = [] {
    TrustRegionOptions o;
    o.max_inner = 30;
    return o;
  }();
  BaselineOptions baseline;
  std::uint64_t seed = 1;
  /// Relative size of the seeded tangent perturbation applied to the rank-1
  /// spectral start; 0 keeps the bare spectral point.
  double init_perturbation = 1e-2;
  /// Per-rank stall test handed to every inner solver (overrides their own):
  /// a stage ends once the cost falls by less than stall_rel (relative) over
  /// stall_window iterations. A window of 0 keeps the solvers' settings.
  int stall_window = 10;
  double stall_rel = 1e-3;
  /// When a stage stalls or reaches a critical point above epsilon, step
  /// along negative curvature and resume at the same rank, at most this many
  /// times per rank. Applied identically to every inner solver.
  int stage_escapes = 3;
  /// Lanczos products per escape probe. Short runs resolve the strongly
  /// negative curvature of real saddles; longer ones mostly find spurious
  /// near-zero directions at degenerate minima.
  int escape_lanczos_steps = 10;
  /// Relative stationarity test for the solve resumed after an escape
  /// (0 = run until it stalls).
  double escape_grad_rel = 5e-2;
  /// After a relative-gradient stop, escape again only if the previous escape
  /// brought the cost below escape_progress times its value before it.
  double escape_progress = 0.75;
  /// Relative stationarity test handed to every inner solver when positive:
  /// a stage ends once ||grad|| <= stage_grad_rel * sqrt(2 f).
  double stage_grad_rel = 5e-2;
  /// Wall-clock cap for the whole pursuit in seconds; 0 disables it.
  double time_limit = 0.0;
};

/// How a rank's starting point was produced.
enum class StageEntry { spectral_init, rank_increase, stagnation_restart };
std::string_view to_string(StageEntry e);

struct RankStage {
  int rank = 0;
  StageEntry entry = StageEntry::spectral_init;
  bool rank_collapse = false;
  int escapes = 0;
  double init_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::max_outer;
  SolverTrace trace;
};

enum class PursuitStatus { converged, max_rank, stagnation, time_limit };
std::string_view to_string(PursuitStatus s);

struct SolveReport {
  std::string algorithm;
  int achieved_rank = 0;
  double final_cost = 0.0;
  bool converged = false;
  PursuitStatus status = PursuitStatus::max_rank;
  double wall_time = 0.0;  // seconds
  std::vector<RankStage> stages;
  std::optional<RateReport> rates;
  std::optional<AlignmentReport> alignment;
};

struct PursuitResult {
  FactoredPoint point;
  SolveReport report;
};

/// Run one of the three fixed-rank solvers from `init`.
FixedRankResult solve_fixed_rank(const CompletionProblem& problem, const FactoredPoint& init,
                                 InnerSolver inner, const TrustRegionOptions& rtr,
                                 const BaselineOptions& baseline);

/// Rank pursuit: solve at rank r, stop once cost <= epsilon, otherwise take a
/// rank-increase step to r + 1. Throws RangeError for invalid options.
PursuitResult solve_min_rank(const CompletionProblem& problem, const PursuitOptions& opts);

enum class RankIncreaseStatus { ok, stagnation, rank_collapse };

struct RankIncrease {
  FactoredPoint point;
  RankIncreaseStatus status = RankIncreaseStatus::ok;
  double alpha = 0.0;
  double cost = 0.0;
};

/// Step from rank r to r + 1 along the projection of -grad f onto the tangent
/// cone of rank-(r+1) matrices: the tangent part of -G plus the leading
/// singular triple of P_U^perp (-G) P_V^perp. The exact line step is halved
/// until the truncated point does not increase the cost; if that never
/// happens the step falls back to the normal component alone, which needs no
/// truncation. On stagnation `point` is x unchanged.
RankIncrease rank_increase_step(const CompletionProblem& problem, const FactoredPoint& x,
                                double grad_tol = 1e-9);

}  // namespace lrmc
