#pragma once

#include "lrmc/instance.hpp"
#include "lrmc/point.hpp"

namespace lrmc {

/// Exact minimizer of t -> f(X + t * D) for the quadratic masked objective:
///   alpha = <P_Omega(D), J - P_Omega(X)> / ||P_Omega(D)||^2.
/// Throws ZeroDirection when ||P_Omega(D)||_F <= 1e-14.
double exact_line_step(const CompletionProblem& problem, const FactoredPoint& x,
                       const LowRank& direction);
double exact_line_step(const CompletionProblem& problem, const FactoredPoint& x,
                       const TangentVector& direction);

}  // namespace lrmc
