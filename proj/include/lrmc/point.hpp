#pragma once

#include <Eigen/Dense>

namespace lrmc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Rank-r matrix X = U * S * V^T with orthonormal U (M x r), V (Q x r) and
/// nonsingular S (r x r). S is usually diagonal but need not be.
struct FactoredPoint {
  MatrixXd U;
  MatrixXd S;
  MatrixXd V;

  int rank() const noexcept { return static_cast<int>(S.rows()); }
  int rows() const noexcept { return static_cast<int>(U.rows()); }
  int cols() const noexcept { return static_cast<int>(V.rows()); }

  /// Dense M x Q matrix; test and small-problem use only.
  MatrixXd ambient() const { return U * S * V.transpose(); }
};

/// Tangent vector at a FactoredPoint in embedded form:
///   xi = U * M * V^T + Up * V^T + U * Vp^T,  U^T Up = 0,  V^T Vp = 0.
struct TangentVector {
  MatrixXd M;
  MatrixXd Up;
  MatrixXd Vp;

  static TangentVector zero(const FactoredPoint& x) {
    return {MatrixXd::Zero(x.rank(), x.rank()), MatrixXd::Zero(x.rows(), x.rank()),
            MatrixXd::Zero(x.cols(), x.rank())};
  }

  TangentVector& operator+=(const TangentVector& o) {
    M += o.M;
    Up += o.Up;
    Vp += o.Vp;
    return *this;
  }
  TangentVector& operator-=(const TangentVector& o) {
    M -= o.M;
    Up -= o.Up;
    Vp -= o.Vp;
    return *this;
  }
  TangentVector& operator*=(double a) {
    M *= a;
    Up *= a;
    Vp *= a;
    return *this;
  }
  /// this += a * o
  TangentVector& axpy(double a, const TangentVector& o) {
    M += a * o.M;
    Up += a * o.Up;
    Vp += a * o.Vp;
    return *this;
  }

  friend TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
  friend TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
  friend TangentVector operator*(double s, TangentVector a) { return a *= s; }
  TangentVector operator-() const { return -1.0 * *this; }
};

/// Matrix in product form A * B^T (A: M x k, B: Q x k).
struct LowRank {
  MatrixXd A;
  MatrixXd B;

  MatrixXd dense() const { return A * B.transpose(); }
};

/// xi as A * B^T with A = [U*M + Up, U], B = [V, Vp].
inline LowRank as_low_rank(const FactoredPoint& x, const TangentVector& xi) {
  const int r = x.rank();
  LowRank out{MatrixXd(x.rows(), 2 * r), MatrixXd(x.cols(), 2 * r)};
  out.A << x.U * xi.M + xi.Up, x.U;
  out.B << x.V, xi.Vp;
  return out;
}

/// X itself as A * B^T with A = U*S, B = V.
inline LowRank as_low_rank(const FactoredPoint& x) { return {x.U * x.S, x.V}; }

inline MatrixXd ambient(const FactoredPoint& x, const TangentVector& xi) {
  return x.U * xi.M * x.V.transpose() + xi.Up * x.V.transpose() + x.U * xi.Vp.transpose();
}

}  // namespace lrmc
