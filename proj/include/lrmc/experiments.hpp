#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lrmc/instance.hpp"
#include "lrmc/rank_pursuit.hpp"

namespace lrmc {

/// Pursuit on an instance with the delivery reports attached: rates always,
/// alignment (at `align_tol`) whenever the pursuit converged. A converged
/// point is first polished by RTR at the same rank down to cost 1/2 align_tol^2
/// so that the zero conditions can hold at that tolerance.
PursuitResult solve_instance(const CachingInstance& instance, const PursuitOptions& opts,
                             double align_tol = 1e-5);

// --- fixed-rank race -----------------------------------------------------

struct BenchConfig {
  int K = 30;
  int m = 10;
  int Q0 = 5;
  int rank = 40;
  std::vector<InnerSolver> algorithms{InnerSolver::rtr, InnerSolver::altmin, InnerSolver::embcg};
  int max_iters = 300;
  std::uint64_t seed = 1;
  /// Relative perturbation of the shared spectral start.
  double init_perturbation = 1e-2;
};

struct BenchSeries {
  InnerSolver algorithm = InnerSolver::rtr;
  FixedRankResult result;
};

/// One random instance, one shared start, every algorithm run for at most
/// max_iters outer iterations with tolerances disabled. Throws RangeError when
/// the rank exceeds min(M, Q).
std::vector<BenchSeries> run_bench(const BenchConfig& config);

/// algorithm,iter,cost,grad_norm,elapsed_ms. Without timing the last column
/// is written as 0 so that equal seeds give byte-identical files.
std::string bench_csv(const std::vector<BenchSeries>& series, bool timing = true);

// --- cache-size sweep ----------------------------------------------------

struct SweepConfig {
  int K = 20;
  int Q0 = 3;
  std::vector<int> cache_sizes;
  int trials = 50;
  double epsilon = 1e-7;
  std::uint64_t seed = 1;
  std::vector<InnerSolver> algorithms{InnerSolver::rtr, InnerSolver::altmin, InnerSolver::embcg};
  /// Wall-clock cap per solve in seconds; 0 disables it.
  double timeout = 120.0;
  /// Template for every solve; epsilon, inner, seed and time_limit are overwritten.
  PursuitOptions pursuit;

  /// Throws RangeError unless trials >= 1 and every size lies in [0, K - 1].
  void validate() const;
};

struct SweepRow {
  int cache_size = 0;
  int trial = 0;
  InnerSolver algorithm = InnerSolver::rtr;
  int achieved_rank = 0;
  double symmetric_rate = 0.0;
  bool converged = false;
  int iters = 0;
  double elapsed_ms = 0.0;
};

std::uint64_t child_seed(std::uint64_t base, int cache_size, int trial);

/// Rows in (size, trial, algorithm) order. Trials run concurrently when
/// OpenMP is available; every trial's instance and solver seeds are fixed up
/// front so the rows do not depend on scheduling.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

std::string sweep_csv(const std::vector<SweepRow>& rows, bool timing = true);

struct SweepSummary {
  int cache_size = 0;
  InnerSolver algorithm = InnerSolver::rtr;
  int trials = 0;
  int converged = 0;
  double mean_rate = 0.0;            // over all trials
  double mean_rate_converged = 0.0;  // over converged trials; 0 if none
};

/// Ordered by cache size, then by first appearance of the algorithm.
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);
std::string summary_csv(const std::vector<SweepSummary>& summary);

}  // namespace lrmc
