#include "lrmc/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrmc/errors.hpp"

namespace lrmc {

namespace {

MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = n(rng);
  return out;
}

struct ThinQR {
  MatrixXd Q;
  MatrixXd R;
};

ThinQR thin_qr(const MatrixXd& A) {
  const Eigen::Index k = std::min(A.rows(), A.cols());
  Eigen::HouseholderQR<MatrixXd> qr(A);
  ThinQR out;
  out.Q = qr.householderQ() * MatrixXd::Identity(A.rows(), k);
  out.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

// Tangent vector from the shared ingredients of every projection.
TangentVector project_from(const FactoredPoint& x, const MatrixXd& GV, const MatrixXd& GtU) {
  TangentVector out;
  out.M = x.U.transpose() * GV;
  out.Up = GV - x.U * out.M;
  out.Vp = GtU - x.V * out.M.transpose();
  return out;
}

void check_tangent(const FactoredPoint& x, const TangentVector& xi) {
  if (xi.M.rows() != x.rank() || xi.M.cols() != x.rank() || xi.Up.rows() != x.rows() ||
      xi.Up.cols() != x.rank() || xi.Vp.rows() != x.cols() || xi.Vp.cols() != x.rank())
    throw DimensionMismatch("tangent vector does not match its base point");
}

}  // namespace

FactoredPoint random_point(int rows, int cols, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > std::min(rows, cols))
    throw RangeError("rank " + std::to_string(rank) + " outside [1, min(" + std::to_string(rows) +
                     ", " + std::to_string(cols) + ")]");
  std::mt19937_64 rng(seed);
  FactoredPoint x;
  x.U = thin_qr(gaussian(rows, rank, rng)).Q;
  x.V = thin_qr(gaussian(cols, rank, rng)).Q;
  std::uniform_real_distribution<double> s(0.5, 2.0);
  x.S = MatrixXd::Zero(rank, rank);
  for (int i = 0; i < rank; ++i) x.S(i, i) = s(rng);
  return x;
}

TangentVector random_tangent(const FactoredPoint& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TangentVector xi;
  xi.M = gaussian(x.rank(), x.rank(), rng);
  xi.Up = gaussian(x.rows(), x.rank(), rng);
  xi.Vp = gaussian(x.cols(), x.rank(), rng);
  xi.Up -= x.U * (x.U.transpose() * xi.Up);
  xi.Vp -= x.V * (x.V.transpose() * xi.Vp);
  return xi;
}

double orthonormality_error(const MatrixXd& Q) {
  return (Q.transpose() * Q - MatrixXd::Identity(Q.cols(), Q.cols())).norm();
}

double tangent_error(const FactoredPoint& x, const TangentVector& xi) {
  return std::max((x.U.transpose() * xi.Up).norm(), (x.V.transpose() * xi.Vp).norm());
}

void reorthonormalize(FactoredPoint& x, double tol) {
  if (orthonormality_error(x.U) <= tol && orthonormality_error(x.V) <= tol) return;
  auto qu = thin_qr(x.U);
  auto qv = thin_qr(x.V);
  x.U = std::move(qu.Q);
  x.V = std::move(qv.Q);
  x.S = qu.R * x.S * qv.R.transpose();
}

TangentVector project_tangent(const FactoredPoint& x, const MatrixXd& G) {
  if (G.rows() != x.rows() || G.cols() != x.cols())
    throw DimensionMismatch("ambient matrix does not match the point");
  return project_from(x, G * x.V, G.transpose() * x.U);
}

TangentVector project_tangent(const FactoredPoint& x, const MaskedResidual& G) {
  if (G.pattern->rows != x.rows() || G.pattern->cols != x.cols())
    throw DimensionMismatch("residual does not match the point");
  return project_from(x, G.times(x.V), G.transpose_times(x.U));
}

TangentVector project_tangent(const FactoredPoint& x, const LowRank& G) {
  if (G.A.rows() != x.rows() || G.B.rows() != x.cols() || G.A.cols() != G.B.cols())
    throw DimensionMismatch("low-rank matrix does not match the point");
  return project_from(x, G.A * (G.B.transpose() * x.V), G.B * (G.A.transpose() * x.U));
}

MetricMode parse_metric_mode(std::string_view name) {
  if (name == "frobenius") return MetricMode::frobenius;
  if (name == "scaled") return MetricMode::scaled;
  throw ModeError("unknown metric mode '" + std::string(name) + "'");
}

FactorComponents to_factor_components(const FactoredPoint& x, const TangentVector& xi) {
  check_tangent(x, xi);
  // dU S = Up  and  S dV^T = Vp^T.
  Eigen::PartialPivLU<MatrixXd> lu(x.S);
  Eigen::PartialPivLU<MatrixXd> lut(x.S.transpose());
  FactorComponents c;
  c.dU = lut.solve(xi.Up.transpose()).transpose();
  c.dS = xi.M;
  c.dV = lu.solve(xi.Vp.transpose()).transpose();
  return c;
}

double metric_inner(const FactoredPoint& x, const TangentVector& xi, const TangentVector& zeta,
                    MetricMode mode) {
  check_tangent(x, xi);
  check_tangent(x, zeta);
  switch (mode) {
    case MetricMode::frobenius:
      return (xi.M.array() * zeta.M.array()).sum() + (xi.Up.array() * zeta.Up.array()).sum() +
             (xi.Vp.array() * zeta.Vp.array()).sum();
    case MetricMode::scaled: {
      const auto a = to_factor_components(x, xi);
      const auto b = to_factor_components(x, zeta);
      const MatrixXd sst = x.S * x.S.transpose();
      const MatrixXd sts = x.S.transpose() * x.S;
      return (a.dU.array() * (b.dU * sst).array()).sum() + (a.dS.array() * b.dS.array()).sum() +
             (a.dV.array() * (b.dV * sts).array()).sum();
    }
  }
  throw ModeError("unknown metric mode");
}

double metric_norm(const TangentVector& xi) {
  return std::sqrt(xi.M.squaredNorm() + xi.Up.squaredNorm() + xi.Vp.squaredNorm());
}

TangentVector riem_grad(const CompletionProblem& problem, const FactoredPoint& x) {
  return project_tangent(x, euclid_grad(problem, x));
}

HessianMode parse_hessian_mode(std::string_view name) {
  if (name == "fd") return HessianMode::fd;
  if (name == "exact") return HessianMode::exact;
  throw ModeError("unknown Hessian mode '" + std::string(name) + "'");
}

HessianOperator::HessianOperator(const CompletionProblem& problem, const FactoredPoint& x,
                                 HessianMode mode)
    : problem_(problem), x_(x), mode_(mode), egrad_(euclid_grad(problem, x)) {
  grad_ = project_tangent(x_, egrad_);
  if (mode_ == HessianMode::exact) {
    Eigen::JacobiSVD<MatrixXd> svd(x_.S);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0) || sv[0] / smin > 1e12)
      throw SingularSigma("cond(S) = " + std::to_string(smin > 0 ? sv[0] / smin : INFINITY) +
                          " exceeds 1e12");
    s_inv_ = x_.S.inverse();
  }
}

TangentVector HessianOperator::apply(const TangentVector& xi) const {
  check_tangent(x_, xi);
  return mode_ == HessianMode::exact ? apply_exact(xi) : apply_fd(xi);
}

TangentVector HessianOperator::apply_exact(const TangentVector& xi) const {
  const auto& U = x_.U;
  const auto& V = x_.V;
  // f is quadratic, so the Euclidean Hessian along xi is P_Omega(xi).
  const MaskedResidual h = mask_tangent(problem_, x_, xi);
  TangentVector out = project_from(x_, h.times(V), h.transpose_times(U));

  const MatrixXd t1 = egrad_.times(xi.Vp);
  out.Up += (t1 - U * (U.transpose() * t1)) * s_inv_;
  const MatrixXd t2 = egrad_.transpose_times(xi.Up);
  out.Vp += (t2 - V * (V.transpose() * t2)) * s_inv_.transpose();
  return out;
}

TangentVector HessianOperator::apply_fd(const TangentVector& xi) const {
  const double n = metric_norm(xi);
  if (n == 0.0) return TangentVector::zero(x_);
  // Central difference of the gradient field, transported by projection.
  const double t = 1e-5 / n;
  const auto transported = [&](double s) {
    const auto moved = retract(x_, s * xi, x_.rank()).point;
    return project_tangent(x_, as_low_rank(moved, riem_grad(problem_, moved)));
  };
  TangentVector out = transported(t);
  out -= transported(-t);
  out *= 0.5 / t;
  return out;
}

TangentVector hess_apply(const CompletionProblem& problem, const FactoredPoint& x,
                         const TangentVector& xi, HessianMode mode) {
  return HessianOperator(problem, x, mode).apply(xi);
}

FactorResult truncate(const LowRank& m, int rank, std::uint64_t pad_seed) {
  const auto rows = m.A.rows();
  const auto cols = m.B.rows();
  if (rank < 1 || rank > std::min(rows, cols))
    throw RangeError("target rank " + std::to_string(rank) + " outside [1, min(M, Q)]");
  if (m.A.cols() != m.B.cols()) throw DimensionMismatch("low-rank factors disagree in width");

  LowRank work = m;
  if (work.A.cols() < rank) {
    // Pad with (random, 0) column pairs: the product is unchanged and the
    // QR factors gain the orthonormal directions the truncation needs.
    const auto extra = rank - work.A.cols();
    std::mt19937_64 rng(pad_seed);
    LowRank padded{MatrixXd(rows, rank), MatrixXd(cols, rank)};
    padded.A << work.A, gaussian(static_cast<int>(rows), static_cast<int>(extra), rng);
    padded.B << work.B, MatrixXd::Zero(cols, extra);
    work = std::move(padded);
  }

  const auto qa = thin_qr(work.A);
  const auto qb = thin_qr(work.B);
  const MatrixXd core = qa.R * qb.R.transpose();
  Eigen::JacobiSVD<MatrixXd> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();

  FactorResult out;
  auto& x = out.point;
  x.U = qa.Q * svd.matrixU().leftCols(rank);
  x.V = qb.Q * svd.matrixV().leftCols(rank);
  x.S = MatrixXd::Zero(rank, rank);
  const double floor = 1e-14 * std::max(1.0, sv[0]);
  for (int i = 0; i < rank; ++i) {
    double s = sv[i];
    if (!(s >= floor)) {
      out.rank_collapse = true;
      s = floor;
    }
    x.S(i, i) = s;
  }
  reorthonormalize(x);
  return out;
}

FactorResult retract(const FactoredPoint& x, const TangentVector& xi, int target_rank) {
  check_tangent(x, xi);
  if (target_rank < x.rank())
    throw RangeError("retraction cannot lower the rank below " + std::to_string(x.rank()));
  const int r = x.rank();
  LowRank sum{MatrixXd(x.rows(), 2 * r), MatrixXd(x.cols(), 2 * r)};
  sum.A << x.U * (x.S + xi.M) + xi.Up, x.U;
  sum.B << x.V, xi.Vp;
  return truncate(sum, target_rank);
}

FactorResult retract(const FactoredPoint& x, const TangentVector& xi) {
  return retract(x, xi, x.rank());
}

FactorResult spectral_init(const CompletionProblem& problem, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > std::min(problem.rows(), problem.cols()))
    throw RangeError("rank " + std::to_string(rank) + " outside [1, min(M, Q)]");
  const MatrixXd J = problem.dense_target();
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-12 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  int keep = 0;
  while (keep < rank && sv[keep] > tol) ++keep;

  FactorResult out;
  auto& x = out.point;
  x.U = MatrixXd(problem.rows(), rank);
  x.V = MatrixXd(problem.cols(), rank);
  x.S = MatrixXd::Zero(rank, rank);
  x.U.leftCols(keep) = svd.matrixU().leftCols(keep);
  x.V.leftCols(keep) = svd.matrixV().leftCols(keep);
  for (int i = 0; i < keep; ++i) x.S(i, i) = sv[i];

  if (keep < rank) {
    out.rank_collapse = true;
    std::mt19937_64 rng(seed);
    const int extra = rank - keep;
    auto complete = [&](MatrixXd& Q, int n) {
      MatrixXd R = gaussian(n, extra, rng);
      const auto head = Q.leftCols(keep);
      R -= head * (head.transpose() * R);
      R -= head * (head.transpose() * R);
      Q.rightCols(extra) = thin_qr(R).Q;
    };
    complete(x.U, problem.rows());
    complete(x.V, problem.cols());
    for (int i = keep; i < rank; ++i) x.S(i, i) = 1e-8;
  }
  return out;
}

FactoredPoint perturb(const FactoredPoint& x, double relative, std::uint64_t seed) {
  if (relative <= 0.0) return x;
  TangentVector xi = random_tangent(x, seed);
  const double n = metric_norm(xi);
  if (n == 0.0) return x;
  xi *= relative * x.S.norm() / n;
  return retract(x, xi).point;
}

}  // namespace lrmc
