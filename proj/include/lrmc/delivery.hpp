#pragma once

#include <vector>

#include "lrmc/instance.hpp"
#include "lrmc/point.hpp"

namespace lrmc {

/// Combining matrix U_{i,k} (Q_i x N) of destination k for desired message i.
struct Combiner {
  int destination = 0;
  int message = 0;
  MatrixXd matrix;
};

/// Linear delivery scheme over N channel uses: precoder V_j (N x Q_j) per
/// message and a combiner per (destination, desired message) pair.
struct DeliveryDesign {
  int channel_uses = 0;
  std::vector<MatrixXd> precoders;
  std::vector<Combiner> combiners;
};

struct AlignmentReport {
  /// max |entry| of U_{i,k} V_j over i != j, j not cached at k.
  double max_zero_violation = 0.0;
  /// min over desired pairs of sigma_min(U_{i,k} V_i).
  double min_signal_sv = 0.0;
  /// max ||U_{i,k} V_i - I||_max; informational only.
  double max_signal_deviation = 0.0;
  double tol = 0.0;
  double sv_floor = 0.0;
  bool feasible = false;
};

struct RateReport {
  int channel_uses = 0;
  std::vector<double> per_message_rate;
  /// Q0 / N for uniform streams, else the minimum per-message rate.
  double symmetric_rate = 0.0;
};

/// Split X = A * B with A = U S and B = V^T into combiners (row blocks of A)
/// and precoders (column blocks of B). Throws InfeasibleInput when the cost of
/// x on the instance's problem exceeds `epsilon`.
DeliveryDesign extract_factors(const FactoredPoint& x, const CachingInstance& instance,
                               double epsilon = 1e-7);

/// Same split for an arbitrary factorization X = A * B (A: M x N, B: N x Q).
DeliveryDesign design_from_factors(const MatrixXd& A, const MatrixXd& B,
                                   const CachingInstance& instance);

/// Checks every zero (interference) condition and every signal condition.
/// Throws DimensionMismatch when the design does not fit the instance.
AlignmentReport verify_alignment(const DeliveryDesign& design, const CachingInstance& instance,
                                 double tol, double sv_floor = 1e-6);

/// Throws RangeError when N < 1.
RateReport rates(int channel_uses, const CachingInstance& instance);

}  // namespace lrmc
