#include "lrmc/rtr.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "lrmc/errors.hpp"

namespace lrmc {

void TrustRegionOptions::validate() const {
  if (!(delta0 > 0.0) || !(delta0 <= delta_bar))
    throw RangeError("trust-region radii must satisfy 0 < delta0 <= delta_bar");
  if (!(rho_accept > 0.0 && rho_accept < 0.25)) throw RangeError("rho_accept must be in (0, 1/4)");
  if (!(grad_tol > 0.0) || !(cost_tol > 0.0) || !(tcg_kappa > 0.0) || !(tcg_theta > 0.0))
    throw RangeError("tolerances must be positive");
  if (!(grad_tol_rel >= 0.0)) throw RangeError("grad_tol_rel must be non-negative");
  if (max_outer < 0 || max_inner < 1 || max_rejections < 1 || max_escapes < 0 ||
      lanczos_steps < 1)
    throw RangeError("iteration caps must be positive");
}

TrustRegionOptions TrustRegionOptions::resolved(const CompletionProblem& problem, int rank) const {
  TrustRegionOptions o = *this;
  if (o.delta_bar <= 0.0) o.delta_bar = std::max(problem.target_norm(), 1e-3);
  if (o.delta0 <= 0.0) o.delta0 = o.delta_bar / 8.0;
  if (o.max_inner <= 0) o.max_inner = rank * (problem.rows() + problem.cols() - rank);
  o.validate();
  return o;
}

std::string_view to_string(TcgStop s) {
  switch (s) {
    case TcgStop::negative_curvature: return "negative_curvature";
    case TcgStop::boundary: return "boundary";
    case TcgStop::kappa_residual: return "kappa_residual";
    case TcgStop::theta_residual: return "theta_residual";
    case TcgStop::max_inner: return "max_inner";
  }
  return "unknown";
}

std::string_view to_string(StopReason s) {
  switch (s) {
    case StopReason::cost_tol: return "cost_tol";
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::relative_grad: return "relative_grad";
    case StopReason::max_outer: return "max_outer";
    case StopReason::stagnation: return "stagnation";
    case StopReason::stall: return "stall";
    case StopReason::time_limit: return "time_limit";
  }
  return "unknown";
}

TcgResult tcg(const HessianOperator& hess, const TangentVector& grad, double delta,
              const TrustRegionOptions& opts) {
  const auto& x = hess.point();
  TcgResult out;
  out.step = TangentVector::zero(x);
  out.hess_step = TangentVector::zero(x);

  const auto dot = [&](const TangentVector& a, const TangentVector& b) {
    return metric_inner(x, a, b);
  };
  auto& eta = out.step;
  auto& heta = out.hess_step;
  TangentVector r = grad;
  double r_r = dot(r, r);
  const double norm_r0 = std::sqrt(r_r);
  if (norm_r0 == 0.0) return out;

  TangentVector d = -r;
  // ||eta||^2, <eta, d>, ||d||^2 tracked incrementally for the boundary solve.
  double e_e = 0.0;
  double e_d = 0.0;
  double d_d = r_r;
  double model = 0.0;  // m(eta) - f
  const double delta2 = delta * delta;
  const double target = norm_r0 * std::min(std::pow(norm_r0, opts.tcg_theta), opts.tcg_kappa);
  const int max_inner = opts.max_inner > 0
                            ? opts.max_inner
                            : x.rank() * (x.rows() + x.cols() - x.rank());

  out.stop = TcgStop::max_inner;
  for (int j = 0; j < max_inner; ++j) {
    out.iterations = j + 1;
    const TangentVector hd = hess.apply(d);
    const double d_hd = dot(d, hd);
    const double alpha = r_r / d_hd;
    const double e_e_new = e_e + 2.0 * alpha * e_d + alpha * alpha * d_d;

    if (d_hd <= 0.0 || e_e_new >= delta2) {
      const double tau = (-e_d + std::sqrt(e_d * e_d + d_d * (delta2 - e_e))) / d_d;
      eta.axpy(tau, d);
      heta.axpy(tau, hd);
      out.stop = d_hd <= 0.0 ? TcgStop::negative_curvature : TcgStop::boundary;
      break;
    }

    TangentVector eta_new = eta;
    eta_new.axpy(alpha, d);
    TangentVector heta_new = heta;
    heta_new.axpy(alpha, hd);
    const double model_new = dot(grad, eta_new) + 0.5 * dot(eta_new, heta_new);
    if (model_new >= model) {
      // Only possible through rounding or an inexact (fd) Hessian.
      out.stop = TcgStop::kappa_residual;
      break;
    }
    eta = std::move(eta_new);
    heta = std::move(heta_new);
    model = model_new;
    e_e = e_e_new;

    r.axpy(alpha, hd);
    const double r_r_new = dot(r, r);
    const double norm_r = std::sqrt(r_r_new);
    if (norm_r <= target) {
      out.stop = opts.tcg_kappa < std::pow(norm_r0, opts.tcg_theta) ? TcgStop::kappa_residual
                                                                     : TcgStop::theta_residual;
      break;
    }
    const double beta = r_r_new / r_r;
    r_r = r_r_new;
    d *= beta;
    d -= r;
    e_d = beta * (e_d + alpha * d_d);
    d_d = r_r + beta * beta * d_d;
  }
  out.model_decrease = -(dot(grad, eta) + 0.5 * dot(eta, heta));
  return out;
}

TcgResult tcg(const CompletionProblem& problem, const FactoredPoint& x, const TangentVector& grad,
              double delta, const TrustRegionOptions& opts) {
  const HessianOperator hess(problem, x, opts.hessian);
  return tcg(hess, grad, delta, opts.resolved(problem, x.rank()));
}

CurvatureEstimate min_curvature(const HessianOperator& hess, int steps, std::uint64_t seed) {
  const auto& x = hess.point();
  const int dim = x.rank() * (x.rows() + x.cols() - x.rank());
  steps = std::min(steps, dim);
  std::vector<TangentVector> q;
  std::vector<double> alpha, beta;
  TangentVector v = random_tangent(x, seed);
  v *= 1.0 / metric_norm(v);
  for (int j = 0; j < steps; ++j) {
    q.push_back(v);
    TangentVector w = hess.apply(v);
    alpha.push_back(metric_inner(x, w, v));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) w.axpy(-metric_inner(x, w, qi), qi);
    const double b = metric_norm(w);
    if (b <= 1e-12 * (std::abs(alpha.back()) + 1.0) || j + 1 == steps) break;
    beta.push_back(b);
    v = std::move(w);
    v *= 1.0 / b;
  }
  const int n = static_cast<int>(q.size());
  MatrixXd T = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < n) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(T);
  CurvatureEstimate out;
  out.lambda = eig.eigenvalues()[0];
  out.direction = TangentVector::zero(x);
  for (int i = 0; i < n; ++i) out.direction.axpy(eig.eigenvectors()(i, 0), q[i]);
  out.direction *= 1.0 / metric_norm(out.direction);
  return out;
}

std::optional<FactoredPoint> negative_curvature_step(const CompletionProblem& problem,
                                                     const HessianOperator& hess, double tau,
                                                     int lanczos_steps, std::uint64_t seed) {
  const auto curv = min_curvature(hess, lanczos_steps, seed);
  if (!(curv.lambda < -1e-10)) return std::nullopt;
  const auto& x = hess.point();
  TangentVector d = curv.direction;
  if (metric_inner(x, d, hess.gradient()) > 0.0) d = -d;
  const double fx = cost(problem, x);
  for (double t = tau; t > 1e-8 * tau; t /= 4.0) {
    auto candidate = retract(x, t * d).point;
    if (cost(problem, candidate) < fx) return candidate;
  }
  return std::nullopt;
}

// Exact mode refuses ill-conditioned S; fall back to fd at such points.
std::unique_ptr<HessianOperator> make_hessian(const CompletionProblem& problem,
                                              const FactoredPoint& x, HessianMode mode) {
  if (mode == HessianMode::exact) {
    try {
      return std::make_unique<HessianOperator>(problem, x, mode);
    } catch (const SingularSigma&) {
    }
  }
  return std::make_unique<HessianOperator>(problem, x, HessianMode::fd);
}

FixedRankResult solve_fixed_rank_rtr(const CompletionProblem& problem, const FactoredPoint& init,
                                     const TrustRegionOptions& options) {
  check_dimensions(problem, init);
  const auto opts = options.resolved(problem, init.rank());
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };

  FixedRankResult out;
  out.trace.algorithm = "rtr";
  out.point = init;
  double fx = cost(problem, out.point);
  auto hess = make_hessian(problem, out.point, opts.hessian);
  double grad_norm = metric_norm(hess->gradient());
  double delta = opts.delta0;
  out.trace.records.push_back({0, fx, grad_norm, delta, true, std::nullopt, 0, elapsed_ms()});

  int rejections = 0;
  int escapes = 0;
  out.reason = StopReason::max_outer;
  for (int k = 1;; ++k) {
    if (fx <= opts.cost_tol) {
      out.reason = StopReason::cost_tol;
      break;
    }
    if (grad_norm <= opts.grad_tol) {
      if (escapes >= opts.max_escapes || k > opts.max_outer) {
        out.reason = StopReason::grad_tol;
        break;
      }
      // Saddle escape: step of length delta along the most negative curvature.
      ++escapes;
      auto moved_to =
          negative_curvature_step(problem, *hess, delta, opts.lanczos_steps, 0x5eed0000ULL + k);
      if (!moved_to) {
        out.reason = StopReason::grad_tol;
        break;
      }
      out.point = std::move(*moved_to);
      fx = cost(problem, out.point);
      hess = make_hessian(problem, out.point, opts.hessian);
      grad_norm = metric_norm(hess->gradient());
      rejections = 0;
      out.trace.records.push_back({k, fx, grad_norm, delta, true, TcgStop::negative_curvature,
                                   opts.lanczos_steps, elapsed_ms()});
      continue;
    }
    if (grad_norm <= opts.grad_tol_rel * std::sqrt(2.0 * fx)) {
      out.reason = StopReason::relative_grad;
      break;
    }
    if (k > opts.max_outer) {
      out.reason = StopReason::max_outer;
      break;
    }
    if (opts.time_limit > 0.0 && elapsed_ms() > 1e3 * opts.time_limit) {
      out.reason = StopReason::time_limit;
      break;
    }

    const auto step = tcg(*hess, hess->gradient(), delta, opts);
    const auto candidate = retract(out.point, step.step).point;
    const double fc = cost(problem, candidate);

    const double reg = 1e-15 * std::max(1.0, std::abs(fx));
    const double rho = step.model_decrease > 0.0
                           ? (fx - fc + reg) / (step.model_decrease + reg)
                           : -std::numeric_limits<double>::infinity();
    const bool on_boundary =
        step.stop == TcgStop::boundary || step.stop == TcgStop::negative_curvature;
    if (rho < 0.25)
      delta /= 4.0;
    else if (rho > 0.75 && on_boundary)
      delta = std::min(2.0 * delta, opts.delta_bar);

    const bool accept = rho > opts.rho_accept && fc <= fx;
    if (accept) {
      out.point = candidate;
      fx = fc;
      hess = make_hessian(problem, out.point, opts.hessian);
      grad_norm = metric_norm(hess->gradient());
      rejections = 0;
    } else {
      ++rejections;
    }
    out.trace.records.push_back(
        {k, fx, grad_norm, delta, accept, step.stop, step.iterations, elapsed_ms()});
    if (rejections >= opts.max_rejections) {
      out.reason = StopReason::stagnation;
      break;
    }
    if (opts.stall_window > 0 && k >= opts.stall_window) {
      const double before = out.trace.records[out.trace.records.size() - 1 - opts.stall_window].cost;
      if (before - fx <= opts.stall_rel * before) {
        out.reason = StopReason::stall;
        break;
      }
    }
  }
  out.cost = fx;
  return out;
}

}  // namespace lrmc
