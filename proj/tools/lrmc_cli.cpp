// lrmc: generate caching instances, solve them by rank pursuit, race the
// fixed-rank solvers and sweep cache sizes.
//
// Exit codes: 0 success, 2 parse/config error, 3 non-convergence or
// infeasible design, 4 I/O error, 1 anything else.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrmc/errors.hpp"
#include "lrmc/experiments.hpp"
#include "lrmc/report.hpp"

namespace {

using namespace lrmc;

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kNotConverged = 3;
constexpr int kIo = 4;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

std::vector<InnerSolver> parse_algorithms(const std::string& list) {
  std::vector<InnerSolver> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_inner_solver(item));
  if (out.empty()) throw ModeError("empty algorithm list");
  return out;
}

// "0-19", "3", "0,5,10" or mixtures such as "0-4,10".
std::vector<int> parse_sizes(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int lo = std::stoi(item.substr(0, dash));
        const int hi = std::stoi(item.substr(dash + 1));
        for (int m = lo; m <= hi; ++m) out.push_back(m);
      }
    } catch (const std::logic_error&) {
      throw RangeError("bad cache size list '" + list + "'");
    }
  }
  if (out.empty()) throw RangeError("empty cache size list");
  return out;
}

struct GenArgs {
  int K = 20, m = 10, Q0 = 3;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string instance, out, design, trace, algorithm = "rtr", hessian = "exact";
  double epsilon = 1e-7, align_tol = 1e-5, time_limit = 0.0;
  std::uint64_t seed = 1;
  int max_rank = 0, max_outer = 500, max_inner = 30, stall_window = 10, stage_escapes = 3;
  double stall_rel = 1e-3, grad_rel = 5e-2;
  bool traces = false;
};

struct BenchArgs {
  int K = 30, m = 10, Q0 = 5, rank = 40, max_iters = 300;
  std::string algorithms = "rtr,altmin,embcg", out;
  std::uint64_t seed = 1;
  bool no_timing = false;
};

struct SweepArgs {
  int K = 20, Q0 = 3, trials = 50;
  std::string sizes = "0-19", algorithms = "rtr,altmin,embcg", out, summary;
  double epsilon = 1e-7, timeout = 120.0;
  std::uint64_t seed = 1;
  bool no_timing = false;
};

struct VerifyArgs {
  std::string instance, design, out;
  double tol = 1e-5, sv_floor = 1e-6;
};

int run_gen(const GenArgs& a) {
  emit(a.out, write_instance(random_unicast_instance(a.K, a.m, a.Q0, a.seed)));
  return kOk;
}

int run_solve(const SolveArgs& a) {
  const auto inst = read_instance(read_file(a.instance));
  PursuitOptions opts;
  opts.epsilon = a.epsilon;
  opts.inner = parse_inner_solver(a.algorithm);
  opts.rtr.hessian = parse_hessian_mode(a.hessian);
  opts.seed = a.seed;
  opts.baseline.seed = a.seed;
  opts.max_rank = a.max_rank;
  opts.time_limit = a.time_limit;
  opts.rtr.max_outer = opts.baseline.max_outer = a.max_outer;
  opts.rtr.max_inner = a.max_inner;
  opts.stage_escapes = a.stage_escapes;
  opts.stall_window = a.stall_window;
  opts.stall_rel = a.stall_rel;
  opts.stage_grad_rel = a.grad_rel;
  const auto res = solve_instance(inst, opts, a.align_tol);
  emit(a.out, write_solve_report(res.report, a.traces));
  if (!a.trace.empty()) write_file(a.trace, trace_csv(res.report));
  if (!a.design.empty() && res.report.converged)
    write_file(a.design, write_design(extract_factors(res.point, inst, a.epsilon)));
  if (!res.report.converged) {
    std::cerr << "lrmc: no completion with cost <= " << format_double(a.epsilon) << " (status "
              << to_string(res.report.status) << ", rank " << res.report.achieved_rank << ")\n";
    return kNotConverged;
  }
  return kOk;
}

int run_bench(const BenchArgs& a) {
  BenchConfig cfg;
  cfg.K = a.K;
  cfg.m = a.m;
  cfg.Q0 = a.Q0;
  cfg.rank = a.rank;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  cfg.algorithms = parse_algorithms(a.algorithms);
  emit(a.out, bench_csv(lrmc::run_bench(cfg), !a.no_timing));
  return kOk;
}

int run_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  cfg.K = a.K;
  cfg.Q0 = a.Q0;
  cfg.cache_sizes = parse_sizes(a.sizes);
  cfg.trials = a.trials;
  cfg.epsilon = a.epsilon;
  cfg.seed = a.seed;
  cfg.algorithms = parse_algorithms(a.algorithms);
  cfg.timeout = a.timeout;
  const auto rows = lrmc::run_sweep(cfg);
  emit(a.out, sweep_csv(rows, !a.no_timing));
  const std::string summary = summary_csv(summarize(rows));
  if (!a.summary.empty())
    write_file(a.summary, summary);
  else if (!a.out.empty() && a.out != "-")
    write_file(a.out + ".summary.csv", summary);
  else
    std::cerr << summary;
  return kOk;
}

int run_verify(const VerifyArgs& a) {
  const auto inst = read_instance(read_file(a.instance));
  const auto design = read_design(read_file(a.design));
  const auto rep = verify_alignment(design, inst, a.tol, a.sv_floor);
  SolveReport wrapper;
  wrapper.algorithm = "verify";
  wrapper.achieved_rank = design.channel_uses;
  wrapper.converged = rep.feasible;
  wrapper.status = rep.feasible ? PursuitStatus::converged : PursuitStatus::stagnation;
  wrapper.rates = rates(design.channel_uses, inst);
  wrapper.alignment = rep;
  emit(a.out, write_solve_report(wrapper));
  return rep.feasible ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix completion for cache-aided content delivery"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a random unicast instance");
  g->add_option("--K", gen.K, "Number of messages (and destinations)");
  g->add_option("--m", gen.m, "Cache size per destination");
  g->add_option("--Q0", gen.Q0, "Streams per message");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "Output path (stdout if omitted)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Find a minimum-rank completion");
  s->add_option("instance", solve.instance, "Instance file")->required();
  s->add_option("--algorithm", solve.algorithm, "rtr, altmin or embcg");
  s->add_option("--epsilon", solve.epsilon, "Cost tolerance");
  s->add_option("--seed", solve.seed);
  s->add_option("--max-rank", solve.max_rank, "Rank cap (0 = min(M, Q))");
  s->add_option("--hessian", solve.hessian, "fd or exact");
  s->add_option("--max-outer", solve.max_outer, "Outer iterations per rank");
  s->add_option("--max-inner", solve.max_inner, "tCG iterations per step (0 = tangent dim)");
  s->add_option("--escapes", solve.stage_escapes, "Negative-curvature restarts per rank");
  s->add_option("--stall-window", solve.stall_window, "Per-rank stall window (0 = off)");
  s->add_option("--stall-rel", solve.stall_rel, "Per-rank relative stall threshold");
  s->add_option("--grad-rel", solve.grad_rel, "Per-rank relative gradient stop (0 = off)");
  s->add_option("--time-limit", solve.time_limit, "Seconds, 0 = none");
  s->add_option("--align-tol", solve.align_tol, "Alignment verification tolerance");
  s->add_option("--out", solve.out, "Report path (stdout if omitted)");
  s->add_option("--design", solve.design, "Also write precoders/combiners here");
  s->add_option("--trace", solve.trace, "Also write the per-iteration trace CSV here");
  s->add_flag("--traces", solve.traces, "Embed per-stage traces in the report");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Fixed-rank convergence race");
  b->add_option("--K", bench.K);
  b->add_option("--m", bench.m);
  b->add_option("--Q0", bench.Q0);
  b->add_option("--rank", bench.rank);
  b->add_option("--algorithms", bench.algorithms, "Comma-separated list");
  b->add_option("--max-iters", bench.max_iters);
  b->add_option("--seed", bench.seed);
  b->add_option("--out", bench.out);
  b->add_flag("--no-timing", bench.no_timing, "Write elapsed_ms as 0");

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Average rate versus cache size");
  w->add_option("--K", sweep.K);
  w->add_option("--Q0", sweep.Q0);
  w->add_option("--sizes", sweep.sizes, "Cache sizes, e.g. 0-19 or 0,5,10");
  w->add_option("--trials", sweep.trials);
  w->add_option("--epsilon", sweep.epsilon);
  w->add_option("--seed", sweep.seed);
  w->add_option("--algorithms", sweep.algorithms, "Comma-separated list");
  w->add_option("--timeout", sweep.timeout, "Seconds per solve, 0 = none");
  w->add_option("--out", sweep.out);
  w->add_option("--summary", sweep.summary, "Summary path (default <out>.summary.csv)");
  w->add_flag("--no-timing", sweep.no_timing, "Write elapsed_ms as 0");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check a saved design against an instance");
  v->add_option("instance", verify.instance)->required();
  v->add_option("design", verify.design)->required();
  v->add_option("--tol", verify.tol);
  v->add_option("--sv-floor", verify.sv_floor);
  v->add_option("--out", verify.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*g) return run_gen(gen);
    if (*s) return run_solve(solve);
    if (*b) return run_bench(bench);
    if (*w) return run_sweep(sweep);
    if (*v) return run_verify(verify);
  } catch (const IoError& e) {
    std::cerr << "lrmc: " << e.what() << '\n';
    return kIo;
  } catch (const InfeasibleInput& e) {
    std::cerr << "lrmc: " << e.what() << '\n';
    return kNotConverged;
  } catch (const ParseError& e) {
    std::cerr << "lrmc: parse error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    // RangeError, ModeError, DimensionMismatch and friends are configuration problems.
    std::cerr << "lrmc: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "lrmc: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
