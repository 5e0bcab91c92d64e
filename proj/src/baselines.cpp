#include "lrmc/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "lrmc/errors.hpp"
#include "lrmc/kernels.hpp"
#include "lrmc/line_search.hpp"

namespace lrmc {

namespace {

class Clock {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool stalled(const std::vector<TraceRecord>& records, const BaselineOptions& opts) {
  const auto n = static_cast<int>(records.size());
  if (opts.stall_window < 1 || n <= opts.stall_window) return false;
  const double before = records[n - 1 - opts.stall_window].cost;
  const double now = records[n - 1].cost;
  return before <= 0.0 || (before - now) / before < opts.stall_rel;
}

// Pseudo-inverse of a symmetric PSD Gram matrix. Returns the eigenvectors of
// the numerically zero eigenvalues through `dead`.
MatrixXd gram_pinv(const MatrixXd& gram, MatrixXd& dead) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  const auto& w = es.eigenvalues();
  const double tol = 1e-12 * std::max(w.maxCoeff(), 1e-300);
  VectorXd inv(w.size());
  std::vector<int> zero;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > tol) {
      inv[i] = 1.0 / w[i];
    } else {
      inv[i] = 0.0;
      zero.push_back(static_cast<int>(i));
    }
  }
  dead.resize(gram.rows(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t t = 0; t < zero.size(); ++t) dead.col(static_cast<Eigen::Index>(t)) = es.eigenvectors().col(zero[t]);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double gaussian_scale(const MatrixXd& m) {
  return m.size() ? std::max(m.norm() / std::sqrt(static_cast<double>(m.size())), 1e-8) : 1.0;
}

}  // namespace

FixedRankResult solve_fixed_rank_altmin(const CompletionProblem& problem,
                                        const FactoredPoint& init, const BaselineOptions& opts) {
  check_dimensions(problem, init);
  const int r = init.rank();
  const Clock clock;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const auto& p = problem.pattern();

  MatrixXd ufac = init.U * init.S;                  // M x r
  MatrixXd vfac = init.V.transpose();               // r x Q
  MatrixXd z(problem.rows(), problem.cols());

  auto factored = [&] { return truncate(LowRank{ufac, vfac.transpose()}, r).point; };
  auto measure = [&](FactoredPoint& x, double& grad_norm) {
    x = factored();
    const auto g = euclid_grad(problem, x);
    grad_norm = metric_norm(project_tangent(x, g));
    return 0.5 * g.squared_norm();
  };
  // Replace null directions of a Gram matrix by fresh random components so
  // the factor regains full rank.
  auto reseed = [&](MatrixXd& rows_factor, const MatrixXd& dead) {
    if (dead.cols() == 0) return;
    const double scale = 1e-3 * gaussian_scale(rows_factor);
    MatrixXd noise(dead.cols(), rows_factor.cols());
    for (Eigen::Index j = 0; j < noise.cols(); ++j)
      for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = scale * normal(rng);
    rows_factor += dead * noise;
  };

  FixedRankResult out;
  out.trace.algorithm = "altmin";
  double grad_norm = 0.0;
  FactoredPoint x;
  double fx = measure(x, grad_norm);
  out.trace.records.push_back({0, fx, grad_norm, 0.0, true, std::nullopt, 0, clock.ms()});

  MatrixXd dead;
  for (int k = 1;; ++k) {
    if (fx <= opts.cost_tol) { out.reason = StopReason::cost_tol; break; }
    if (grad_norm <= opts.grad_tol) { out.reason = StopReason::grad_tol; break; }
    if (grad_norm <= opts.grad_tol_rel * std::sqrt(2.0 * fx)) { out.reason = StopReason::relative_grad; break; }
    if (stalled(out.trace.records, opts)) { out.reason = StopReason::stall; break; }
    if (k > opts.max_outer) { out.reason = StopReason::max_outer; break; }
    if (opts.time_limit > 0.0 && clock.ms() > 1e3 * opts.time_limit) {
      out.reason = StopReason::time_limit;
      break;
    }

    z.noalias() = ufac * vfac;
    for (std::size_t e = 0; e < p.size(); ++e)
      z(p.row[e], p.col[e]) = problem.target()[static_cast<Eigen::Index>(e)];

    MatrixXd vv = gram_pinv(vfac * vfac.transpose(), dead);
    if (dead.cols() > 0) {
      // Dead row directions of Vfac: V <- V + dead * noise.
      reseed(vfac, dead);
      vv = gram_pinv(vfac * vfac.transpose(), dead);
    }
    ufac = z * (vfac.transpose() * vv);

    MatrixXd uu = gram_pinv(ufac.transpose() * ufac, dead);
    if (dead.cols() > 0) {
      MatrixXd ut = ufac.transpose();
      reseed(ut, dead);
      ufac = ut.transpose();
      uu = gram_pinv(ufac.transpose() * ufac, dead);
    }
    vfac = uu * (ufac.transpose() * z);

    fx = measure(x, grad_norm);
    out.trace.records.push_back({k, fx, grad_norm, 0.0, true, std::nullopt, 0, clock.ms()});
  }
  out.point = std::move(x);
  out.cost = fx;
  return out;
}

FixedRankResult solve_fixed_rank_embcg(const CompletionProblem& problem,
                                       const FactoredPoint& init, const BaselineOptions& opts) {
  check_dimensions(problem, init);
  const Clock clock;
  const auto dot = [&](const FactoredPoint& at, const TangentVector& a, const TangentVector& b) {
    return metric_inner(at, a, b);
  };

  FixedRankResult out;
  out.trace.algorithm = "embcg";
  FactoredPoint x = init;
  double fx = cost(problem, x);
  TangentVector g = riem_grad(problem, x);
  double g_g = dot(x, g, g);
  TangentVector d = -g;
  out.trace.records.push_back({0, fx, std::sqrt(g_g), 0.0, true, std::nullopt, 0, clock.ms()});

  for (int k = 1;; ++k) {
    if (fx <= opts.cost_tol) { out.reason = StopReason::cost_tol; break; }
    if (std::sqrt(g_g) <= opts.grad_tol) { out.reason = StopReason::grad_tol; break; }
    if (std::sqrt(g_g) <= opts.grad_tol_rel * std::sqrt(2.0 * fx)) { out.reason = StopReason::relative_grad; break; }
    if (stalled(out.trace.records, opts)) { out.reason = StopReason::stall; break; }
    if (k > opts.max_outer) { out.reason = StopReason::max_outer; break; }
    if (opts.time_limit > 0.0 && clock.ms() > 1e3 * opts.time_limit) {
      out.reason = StopReason::time_limit;
      break;
    }

    if (dot(x, g, d) >= 0.0) d = -g;

    // Exact step along d, retract, halve until the cost does not increase.
    // A failed conjugate direction falls back to steepest descent once.
    bool moved = false;
    FactoredPoint next;
    double fnext = fx;
    for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
      double alpha;
      try {
        alpha = exact_line_step(problem, x, d);
      } catch (const ZeroDirection&) {
        break;
      }
      for (int halving = 0; halving < 30; ++halving, alpha *= 0.5) {
        next = retract(x, alpha * d).point;
        fnext = cost(problem, next);
        if (fnext <= fx) {
          moved = true;
          break;
        }
      }
      if (!moved) d = -g;
    }
    if (!moved) {
      out.reason = StopReason::stagnation;
      break;
    }

    TangentVector g_next = riem_grad(problem, next);
    const double gn_gn = dot(next, g_next, g_next);
    const TangentVector g_old = project_tangent(next, as_low_rank(x, g));
    const TangentVector d_old = project_tangent(next, as_low_rank(x, d));
    double beta = std::max(0.0, (gn_gn - dot(next, g_next, g_old)) / g_g);
    if (std::abs(dot(next, g_next, g_old)) >= 0.1 * gn_gn) beta = 0.0;  // Powell restart

    x = std::move(next);
    fx = fnext;
    g = std::move(g_next);
    g_g = gn_gn;
    d = -g;
    d.axpy(beta, d_old);
    out.trace.records.push_back({k, fx, std::sqrt(g_g), 0.0, true, std::nullopt, 0, clock.ms()});
  }
  out.point = std::move(x);
  out.cost = fx;
  return out;
}

}  // namespace lrmc
