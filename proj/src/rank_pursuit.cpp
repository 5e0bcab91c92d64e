#include "lrmc/rank_pursuit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lrmc/errors.hpp"

namespace lrmc {

InnerSolver parse_inner_solver(std::string_view name) {
  if (name == "rtr") return InnerSolver::rtr;
  if (name == "altmin") return InnerSolver::altmin;
  if (name == "embcg") return InnerSolver::embcg;
  throw ModeError("unknown algorithm '" + std::string(name) + "' (expected rtr, altmin or embcg)");
}

std::string_view to_string(InnerSolver s) {
  switch (s) {
    case InnerSolver::rtr: return "rtr";
    case InnerSolver::altmin: return "altmin";
    case InnerSolver::embcg: return "embcg";
  }
  return "unknown";
}

std::string_view to_string(StageEntry e) {
  switch (e) {
    case StageEntry::spectral_init: return "spectral_init";
    case StageEntry::rank_increase: return "rank_increase";
    case StageEntry::stagnation_restart: return "stagnation_restart";
  }
  return "unknown";
}

std::string_view to_string(PursuitStatus s) {
  switch (s) {
    case PursuitStatus::converged: return "converged";
    case PursuitStatus::max_rank: return "max_rank";
    case PursuitStatus::stagnation: return "stagnation";
    case PursuitStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

// --- line search ---------------------------------------------------------

double exact_line_step(const CompletionProblem& problem, const FactoredPoint& x,
                       const LowRank& direction) {
  const VectorXd pd = sample(problem, direction);
  const double denom = pd.squaredNorm();
  if (std::sqrt(denom) <= 1e-14) throw ZeroDirection("direction vanishes on the observed set");
  const VectorXd residual = problem.target() - sample(problem, as_low_rank(x));
  return pd.dot(residual) / denom;
}

double exact_line_step(const CompletionProblem& problem, const FactoredPoint& x,
                       const TangentVector& direction) {
  return exact_line_step(problem, x, as_low_rank(x, direction));
}

// --- rank increase -------------------------------------------------------

namespace {

LowRank concat(const LowRank& a, const LowRank& b) {
  LowRank out{MatrixXd(a.A.rows(), a.A.cols() + b.A.cols()),
              MatrixXd(a.B.rows(), a.B.cols() + b.B.cols())};
  out.A << a.A, b.A;
  out.B << a.B, b.B;
  return out;
}

LowRank scaled(LowRank m, double s) {
  m.A *= s;
  return m;
}

bool has_exact_rank(const FactoredPoint& x) {
  Eigen::JacobiSVD<MatrixXd> svd(x.S);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1] > 1e-12 * sv[0];
}

}  // namespace

RankIncrease rank_increase_step(const CompletionProblem& problem, const FactoredPoint& x,
                                double grad_tol) {
  check_dimensions(problem, x);
  const int r = x.rank();
  if (r + 1 > std::min(problem.rows(), problem.cols()))
    throw RangeError("cannot increase rank beyond min(M, Q)");

  RankIncrease out;
  out.point = x;
  out.cost = cost(problem, x);

  MaskedResidual neg = euclid_grad(problem, x);
  neg.values = -neg.values;
  const TangentVector tangent = project_tangent(x, neg);

  // Normal component P_U^perp G P_V^perp, dense at desk scale.
  MatrixXd normal = neg.dense();
  normal -= x.U * (x.U.transpose() * normal);
  normal -= (normal * x.V) * x.V.transpose();
  // Only the leading triple is needed: top eigenvector of the Gram matrix,
  // with sigma and u recovered from N v so that sigma keeps full accuracy.
  const bool wide = normal.cols() > normal.rows();
  const MatrixXd gram = wide ? MatrixXd(normal * normal.transpose()) : MatrixXd(normal.transpose() * normal);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const VectorXd lead = eig.eigenvectors().col(gram.rows() - 1);
  VectorXd u, v;
  double sigma = 0.0;
  if (wide) {
    v = normal.transpose() * lead;
    sigma = v.norm();
    u = lead;
    v = sigma > 0.0 ? VectorXd(v / sigma) : VectorXd(VectorXd::Zero(v.size()));
  } else {
    u = normal * lead;
    sigma = u.norm();
    v = lead;
    u = sigma > 0.0 ? VectorXd(u / sigma) : VectorXd(VectorXd::Zero(u.size()));
  }

  const double g_norm = neg.norm();
  if (sigma <= 1e-12 * g_norm && metric_norm(tangent) <= grad_tol) {
    out.status = RankIncreaseStatus::stagnation;
    return out;
  }

  const LowRank normal_part{sigma * u, v};
  const LowRank direction = concat(as_low_rank(x, tangent), normal_part);

  double alpha = 0.0;
  try {
    alpha = exact_line_step(problem, x, direction);
  } catch (const ZeroDirection&) {
    out.status = RankIncreaseStatus::stagnation;
    return out;
  }

  const LowRank base = as_low_rank(x);
  for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
    auto cand = truncate(concat(base, scaled(direction, alpha)), r + 1);
    const double fc = cost(problem, cand.point);
    if (fc <= out.cost) {
      out.point = std::move(cand.point);
      out.alpha = alpha;
      out.cost = fc;
      out.status = cand.rank_collapse || !has_exact_rank(out.point)
                       ? RankIncreaseStatus::rank_collapse
                       : RankIncreaseStatus::ok;
      return out;
    }
  }

  // X + t sigma u v^T is exactly rank r + 1 since u, v are orthogonal to U, V.
  FactoredPoint fallback;
  fallback.U.resize(x.rows(), r + 1);
  fallback.U << x.U, u;
  fallback.V.resize(x.cols(), r + 1);
  fallback.V << x.V, v;
  fallback.S = MatrixXd::Zero(r + 1, r + 1);
  fallback.S.topLeftCorner(r, r) = x.S;
  double t = 0.0;
  try {
    t = exact_line_step(problem, x, normal_part);
  } catch (const ZeroDirection&) {
  }
  const double floor = 1e-14 * std::max(1.0, x.S.norm());
  fallback.S(r, r) = std::abs(t * sigma) > floor ? t * sigma : floor;
  out.point = std::move(fallback);
  out.alpha = t;
  out.cost = cost(problem, out.point);
  out.status = std::abs(t * sigma) > floor && has_exact_rank(out.point)
                   ? RankIncreaseStatus::ok
                   : RankIncreaseStatus::rank_collapse;
  return out;
}

// --- pursuit -------------------------------------------------------------

FixedRankResult solve_fixed_rank(const CompletionProblem& problem, const FactoredPoint& init,
                                 InnerSolver inner, const TrustRegionOptions& rtr,
                                 const BaselineOptions& baseline) {
  switch (inner) {
    case InnerSolver::rtr: return solve_fixed_rank_rtr(problem, init, rtr);
    case InnerSolver::altmin: return solve_fixed_rank_altmin(problem, init, baseline);
    case InnerSolver::embcg: return solve_fixed_rank_embcg(problem, init, baseline);
  }
  throw ModeError("unknown inner solver");
}

namespace {

// Truncated SVD of X with its observed entries reset to J.
FactorResult residual_restart(const CompletionProblem& problem, const FactoredPoint& x, int rank) {
  MatrixXd y = x.ambient() - euclid_grad(problem, x).dense();
  return truncate(LowRank{std::move(y), MatrixXd::Identity(problem.cols(), problem.cols())}, rank);
}

}  // namespace

PursuitResult solve_min_rank(const CompletionProblem& problem, const PursuitOptions& opts) {
  const int max_rank = opts.max_rank > 0 ? opts.max_rank : std::min(problem.rows(), problem.cols());
  if (!(opts.epsilon > 0.0)) throw RangeError("epsilon must be positive");
  if (max_rank < 1 || max_rank > std::min(problem.rows(), problem.cols()))
    throw RangeError("max_rank must lie in [1, min(M, Q)]");
  if (opts.escape_lanczos_steps < 1) throw RangeError("escape_lanczos_steps must be positive");

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  PursuitResult out;
  auto& rep = out.report;
  rep.algorithm = std::string(to_string(opts.inner));

  auto init = spectral_init(problem, 1, opts.seed);
  FactoredPoint x = std::move(init.point);
  bool collapse = init.rank_collapse;
  x = perturb(x, opts.init_perturbation, opts.seed ^ 0x9e3779b97f4a7c15ULL);
  StageEntry entry = StageEntry::spectral_init;

  for (int r = 1;; ++r) {
    TrustRegionOptions rtr = opts.rtr;
    BaselineOptions base = opts.baseline;
    rtr.cost_tol = base.cost_tol = opts.epsilon;
    if (opts.stall_window > 0) {
      rtr.stall_window = base.stall_window = opts.stall_window;
      rtr.stall_rel = base.stall_rel = opts.stall_rel;
    }
    if (opts.stage_grad_rel > 0.0) rtr.grad_tol_rel = base.grad_tol_rel = opts.stage_grad_rel;
    if (opts.time_limit > 0.0) {
      const double left = std::max(opts.time_limit - elapsed(), 1e-3);
      rtr.time_limit = rtr.time_limit > 0.0 ? std::min(rtr.time_limit, left) : left;
      base.time_limit = base.time_limit > 0.0 ? std::min(base.time_limit, left) : left;
    }

    RankStage stage;
    stage.rank = r;
    stage.entry = entry;
    stage.rank_collapse = collapse;
    stage.init_cost = cost(problem, x);
    auto res = solve_fixed_rank(problem, x, opts.inner, rtr, base);
    // True stationary points and stalls get the full escape budget. After a
    // deliberate early stop (relative gradient) escapes continue only while
    // the previous one paid off: at infeasible ranks they rarely do and cost
    // a full re-solve each, while the symmetric saddles of feasible ranks
    // usually fall after one or two.
    double before_escape = std::numeric_limits<double>::infinity();
    const auto stuck = [&] {
      if (res.reason == StopReason::stall || res.reason == StopReason::grad_tol) return true;
      return res.reason == StopReason::relative_grad && res.cost < opts.escape_progress * before_escape;
    };
    while (stage.escapes < opts.stage_escapes && res.cost > opts.epsilon && stuck()) {
      const auto hess = make_hessian(problem, res.point, opts.rtr.hessian);
      auto moved = negative_curvature_step(problem, *hess, problem.target_norm() / 8.0,
                                           opts.escape_lanczos_steps,
                                           opts.seed + 7919ULL * r + stage.escapes);
      if (!moved) break;
      ++stage.escapes;
      before_escape = res.cost;
      if (opts.time_limit > 0.0) {
        const double left = std::max(opts.time_limit - elapsed(), 1e-3);
        rtr.time_limit = base.time_limit = left;
      }
      // Near the saddle the gradient is still small against sqrt(2 f), so
      // the resumed solve gets a tighter relative test.
      TrustRegionOptions rtr_resume = rtr;
      BaselineOptions base_resume = base;
      rtr_resume.grad_tol_rel = base_resume.grad_tol_rel = opts.escape_grad_rel;
      auto more = solve_fixed_rank(problem, *moved, opts.inner, rtr_resume, base_resume);
      const int offset = res.trace.records.back().iter;
      const double t0 = res.trace.records.back().elapsed_ms;
      // The resumed solve's initial record stands for the escape step itself.
      more.trace.records.front().tcg_stop = TcgStop::negative_curvature;
      for (auto rec : more.trace.records) {
        rec.iter += offset + 1;
        rec.elapsed_ms += t0;
        res.trace.records.push_back(rec);
      }
      res.point = std::move(more.point);
      res.cost = more.cost;
      res.reason = more.reason;
    }
    stage.final_cost = res.cost;
    stage.reason = res.reason;
    stage.iterations = res.trace.records.back().iter;
    stage.trace = std::move(res.trace);
    rep.stages.push_back(std::move(stage));
    x = std::move(res.point);

    rep.achieved_rank = r;
    rep.final_cost = res.cost;
    if (res.cost <= opts.epsilon) {
      rep.status = PursuitStatus::converged;
      break;
    }
    if (opts.time_limit > 0.0 && elapsed() >= opts.time_limit) {
      rep.status = PursuitStatus::time_limit;
      break;
    }
    if (r >= max_rank) {
      rep.status = PursuitStatus::max_rank;
      break;
    }

    auto inc = rank_increase_step(problem, x, opts.rtr.grad_tol);
    if (inc.status == RankIncreaseStatus::stagnation) {
      if (entry == StageEntry::stagnation_restart) {
        rep.status = PursuitStatus::stagnation;
        break;
      }
      auto restart = residual_restart(problem, x, r + 1);
      x = std::move(restart.point);
      collapse = restart.rank_collapse;
      entry = StageEntry::stagnation_restart;
    } else {
      x = std::move(inc.point);
      collapse = inc.status == RankIncreaseStatus::rank_collapse;
      entry = StageEntry::rank_increase;
    }
  }

  rep.converged = rep.status == PursuitStatus::converged;
  rep.wall_time = elapsed();
  out.point = std::move(x);
  return out;
}

}  // namespace lrmc
