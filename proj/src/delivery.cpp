#include "lrmc/delivery.hpp"

#include <algorithm>
#include <limits>

#include "lrmc/errors.hpp"
#include "lrmc/objective.hpp"

namespace lrmc {

DeliveryDesign extract_factors(const FactoredPoint& x, const CachingInstance& instance,
                               double epsilon) {
  const auto problem = build_completion_problem(instance);
  const double f = cost(problem, x);
  if (f > epsilon)
    throw InfeasibleInput("completion cost " + std::to_string(f) + " exceeds " +
                          std::to_string(epsilon));
  return design_from_factors(x.U * x.S, x.V.transpose(), instance);
}

DeliveryDesign design_from_factors(const MatrixXd& A, const MatrixXd& B,
                                   const CachingInstance& instance) {
  const auto problem = build_completion_problem(instance);
  if (A.rows() != problem.rows() || B.cols() != problem.cols() || A.cols() != B.rows())
    throw DimensionMismatch("factors do not match the instance's completion problem");

  DeliveryDesign d;
  d.channel_uses = static_cast<int>(A.cols());
  for (const auto& cb : problem.col_blocks())
    d.precoders.push_back(B.middleCols(cb.begin, cb.end - cb.begin));
  for (const auto& rb : problem.row_blocks())
    d.combiners.push_back({rb.destination, rb.message, A.middleRows(rb.begin, rb.end - rb.begin)});
  return d;
}

AlignmentReport verify_alignment(const DeliveryDesign& design, const CachingInstance& instance,
                                 double tol, double sv_floor) {
  const auto& streams = instance.streams();
  if (static_cast<int>(design.precoders.size()) != instance.num_messages())
    throw DimensionMismatch("design has " + std::to_string(design.precoders.size()) +
                            " precoders for " + std::to_string(instance.num_messages()) +
                            " messages");
  for (int j = 0; j < instance.num_messages(); ++j) {
    const auto& v = design.precoders[j];
    if (v.rows() != design.channel_uses || v.cols() != streams[j])
      throw DimensionMismatch("precoder " + std::to_string(j + 1) + " has the wrong shape");
  }
  std::size_t expected = 0;
  for (const auto& dst : instance.destinations()) expected += dst.desired.size();
  if (design.combiners.size() != expected)
    throw DimensionMismatch("design has " + std::to_string(design.combiners.size()) +
                            " combiners, expected " + std::to_string(expected));

  AlignmentReport rep;
  rep.tol = tol;
  rep.sv_floor = sv_floor;
  rep.min_signal_sv = std::numeric_limits<double>::infinity();
  for (const auto& c : design.combiners) {
    if (c.destination < 0 || c.destination >= instance.num_destinations() || c.message < 0 ||
        c.message >= instance.num_messages())
      throw DimensionMismatch("combiner refers to an unknown destination or message");
    const auto& desired = instance.destinations()[c.destination].desired;
    if (!std::binary_search(desired.begin(), desired.end(), c.message))
      throw DimensionMismatch("combiner for a message its destination does not desire");
    if (c.matrix.rows() != streams[c.message] || c.matrix.cols() != design.channel_uses)
      throw DimensionMismatch("combiner has the wrong shape");

    for (int j = 0; j < instance.num_messages(); ++j) {
      if (instance.is_cached(c.destination, j)) continue;
      const MatrixXd prod = c.matrix * design.precoders[j];
      if (j == c.message) {
        Eigen::JacobiSVD<MatrixXd> svd(prod);
        rep.min_signal_sv = std::min(rep.min_signal_sv, svd.singularValues().minCoeff());
        const MatrixXd dev = prod - MatrixXd::Identity(prod.rows(), prod.cols());
        rep.max_signal_deviation = std::max(rep.max_signal_deviation, dev.cwiseAbs().maxCoeff());
      } else {
        rep.max_zero_violation = std::max(rep.max_zero_violation, prod.cwiseAbs().maxCoeff());
      }
    }
  }
  if (design.combiners.empty()) rep.min_signal_sv = 0.0;
  rep.feasible = rep.max_zero_violation <= tol && rep.min_signal_sv >= sv_floor;
  return rep;
}

RateReport rates(int channel_uses, const CachingInstance& instance) {
  if (channel_uses < 1) throw RangeError("channel uses must be positive");
  RateReport rep;
  rep.channel_uses = channel_uses;
  for (int q : instance.streams())
    rep.per_message_rate.push_back(static_cast<double>(q) / channel_uses);
  rep.symmetric_rate = instance.uniform_streams()
                           ? static_cast<double>(instance.streams().front()) / channel_uses
                           : *std::min_element(rep.per_message_rate.begin(),
                                               rep.per_message_rate.end());
  return rep;
}

}  // namespace lrmc
