#include "lrmc/experiments.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "lrmc/delivery.hpp"
#include "lrmc/errors.hpp"
#include "lrmc/report.hpp"

namespace lrmc {

PursuitResult solve_instance(const CachingInstance& instance, const PursuitOptions& opts,
                             double align_tol) {
  const auto problem = build_completion_problem(instance);
  auto res = solve_min_rank(problem, opts);
  res.report.rates = rates(res.report.achieved_rank, instance);
  if (res.report.converged) {
    // Cost <= 1/2 tol^2 bounds every constraint residual by tol.
    const double polish_tol = 0.5 * align_tol * align_tol;
    if (res.report.final_cost > polish_tol) {
      TrustRegionOptions o = opts.rtr;
      o.cost_tol = polish_tol;
      o.max_outer = 50;
      if (opts.time_limit > 0.0) o.time_limit = std::max(opts.time_limit - res.report.wall_time, 1e-3);
      auto polished = solve_fixed_rank_rtr(problem, res.point, o);
      if (polished.cost < res.report.final_cost) {
        res.point = std::move(polished.point);
        res.report.final_cost = polished.cost;
      }
    }
    const auto design = extract_factors(res.point, instance, opts.epsilon);
    res.report.alignment = verify_alignment(design, instance, align_tol);
  }
  return res;
}

std::vector<BenchSeries> run_bench(const BenchConfig& config) {
  if (config.max_iters < 0) throw RangeError("max_iters must be non-negative");
  const auto inst = random_unicast_instance(config.K, config.m, config.Q0, config.seed);
  const auto problem = build_completion_problem(inst);
  if (config.rank < 1 || config.rank > std::min(problem.rows(), problem.cols()))
    throw RangeError("rank " + std::to_string(config.rank) + " outside [1, min(M, Q)]");

  const auto spectral = spectral_init(problem, config.rank, config.seed);
  const FactoredPoint start =
      perturb(spectral.point, config.init_perturbation, config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrustRegionOptions rtr;
  rtr.max_outer = config.max_iters;
  rtr.cost_tol = std::numeric_limits<double>::min();
  rtr.grad_tol = std::numeric_limits<double>::min();
  BaselineOptions base;
  base.max_outer = config.max_iters;
  base.cost_tol = std::numeric_limits<double>::min();
  base.grad_tol = std::numeric_limits<double>::min();
  base.seed = config.seed;

  std::vector<BenchSeries> out;
  for (const auto alg : config.algorithms)
    out.push_back({alg, solve_fixed_rank(problem, start, alg, rtr, base)});
  return out;
}

std::string bench_csv(const std::vector<BenchSeries>& series, bool timing) {
  std::ostringstream os;
  os << "algorithm,iter,cost,grad_norm,elapsed_ms\n";
  for (const auto& s : series)
    for (const auto& r : s.result.trace.records)
      os << to_string(s.algorithm) << ',' << r.iter << ',' << format_double(r.cost) << ','
         << format_double(r.grad_norm) << ',' << format_double(timing ? r.elapsed_ms : 0.0)
         << '\n';
  return os.str();
}

void SweepConfig::validate() const {
  if (trials < 1) throw RangeError("trials must be at least 1");
  if (K < 2) throw RangeError("K must be at least 2");
  if (Q0 < 1) throw RangeError("Q0 must be at least 1");
  if (!(epsilon > 0.0)) throw RangeError("epsilon must be positive");
  if (algorithms.empty()) throw RangeError("no algorithms selected");
  for (const int m : cache_sizes)
    if (m < 0 || m > K - 1) throw RangeError("cache size " + std::to_string(m) + " outside [0, K-1]");
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t child_seed(std::uint64_t base, int cache_size, int trial) {
  std::uint64_t h = splitmix(base);
  h = splitmix(h ^ static_cast<std::uint64_t>(cache_size));
  return splitmix(h ^ static_cast<std::uint64_t>(trial));
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  const int n_sizes = static_cast<int>(config.cache_sizes.size());
  const int n_alg = static_cast<int>(config.algorithms.size());
  const int tasks = n_sizes * config.trials;
  std::vector<SweepRow> rows(static_cast<std::size_t>(tasks) * n_alg);
  std::vector<std::string> errors(tasks);

#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < tasks; ++t) {
    const int m = config.cache_sizes[t / config.trials];
    const int trial = t % config.trials;
    try {
      const std::uint64_t seed = child_seed(config.seed, m, trial);
      const auto inst = random_unicast_instance(config.K, m, config.Q0, seed);
      const auto problem = build_completion_problem(inst);
      for (int a = 0; a < n_alg; ++a) {
        PursuitOptions opts = config.pursuit;
        opts.epsilon = config.epsilon;
        opts.inner = config.algorithms[a];
        opts.seed = seed;
        opts.time_limit = config.timeout;
        const auto res = solve_min_rank(problem, opts);
        SweepRow& row = rows[static_cast<std::size_t>(t) * n_alg + a];
        row.cache_size = m;
        row.trial = trial;
        row.algorithm = opts.inner;
        row.achieved_rank = res.report.achieved_rank;
        row.symmetric_rate = rates(res.report.achieved_rank, inst).symmetric_rate;
        row.converged = res.report.converged;
        for (const auto& s : res.report.stages) row.iters += s.iterations;
        row.elapsed_ms = res.report.wall_time * 1e3;
      }
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error("sweep trial failed: " + e);
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool timing) {
  std::ostringstream os;
  os << "cache_size,trial,algorithm,achieved_rank,symmetric_rate,converged,iters,elapsed_ms\n";
  for (const auto& r : rows)
    os << r.cache_size << ',' << r.trial << ',' << to_string(r.algorithm) << ','
       << r.achieved_rank << ',' << format_double(r.symmetric_rate) << ','
       << (r.converged ? 1 : 0) << ',' << r.iters << ','
       << format_double(timing ? r.elapsed_ms : 0.0) << '\n';
  return os.str();
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  std::map<std::pair<int, int>, std::size_t> index;  // (size, algorithm slot) -> out
  std::vector<InnerSolver> order;
  for (const auto& r : rows) {
    auto it = std::find(order.begin(), order.end(), r.algorithm);
    const int slot = static_cast<int>(it - order.begin());
    if (it == order.end()) order.push_back(r.algorithm);
    auto [pos, fresh] = index.try_emplace({r.cache_size, slot}, out.size());
    if (fresh) out.push_back({r.cache_size, r.algorithm});
    auto& s = out[pos->second];
    ++s.trials;
    s.mean_rate += r.symmetric_rate;
    if (r.converged) {
      ++s.converged;
      s.mean_rate_converged += r.symmetric_rate;
    }
  }
  for (auto& s : out) {
    s.mean_rate /= s.trials;
    if (s.converged) s.mean_rate_converged /= s.converged;
  }
  std::stable_sort(out.begin(), out.end(), [&](const SweepSummary& a, const SweepSummary& b) {
    if (a.cache_size != b.cache_size) return a.cache_size < b.cache_size;
    const auto ia = std::find(order.begin(), order.end(), a.algorithm);
    const auto ib = std::find(order.begin(), order.end(), b.algorithm);
    return ia < ib;
  });
  return out;
}

std::string summary_csv(const std::vector<SweepSummary>& summary) {
  std::ostringstream os;
  os << "cache_size,algorithm,trials,converged,mean_rate,mean_rate_converged\n";
  for (const auto& s : summary)
    os << s.cache_size << ',' << to_string(s.algorithm) << ',' << s.trials << ',' << s.converged
       << ',' << format_double(s.mean_rate) << ',' << format_double(s.mean_rate_converged) << '\n';
  return os.str();
}

}  // namespace lrmc
